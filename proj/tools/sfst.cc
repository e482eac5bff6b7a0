// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// The sfst command line: approx, count, normalize, intersect, perplexity,
// randgen, shortestdistance, trim, ngram-count, ngram-make, ngram-prune.
// Results go to stdout, diagnostics to stderr; exit 1 on usage errors,
// exit 2 on data errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <sfst/counting.h>
#include <sfst/evaluation.h>
#include <sfst/intersection.h>
#include <sfst/kl-minimization.h>
#include <sfst/ngram.h>
#include <sfst/sequence-model.h>
#include <sfst/shortest-distance.h>
#include <sfst/text-io.h>
#include <sfst/util.h>

namespace {

using sfst::Automaton;
using sfst::SymbolId;
using sfst::SymbolTable;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sfst::Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonFlags {
  SymbolId phi_label = 0;
  std::string symbols_path;

  std::shared_ptr<const SymbolTable> TableFor(const std::string& fst_text) const {
    if (!symbols_path.empty()) {
      std::ifstream in(symbols_path);
      if (!in) throw sfst::Error("cannot open " + symbols_path);
      return std::make_shared<const SymbolTable>(
          SymbolTable::Read(in, phi_label));
    }
    return sfst::SynthesizeTableForText(fst_text, phi_label);
  }

  Automaton Load(const std::string& path) const {
    const std::string text = ReadFile(path);
    return sfst::ParseAutomaton(text, TableFor(text));
  }
};

void AddCommonFlags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--phi-label", flags->phi_label,
                  "Symbol id of the failure label (default 0)");
  cmd->add_option("--symbols", flags->symbols_path,
                  "Symbol table file; synthesized from the input when absent");
}

void PrintEvalReport(const sfst::EvalReport& report, bool bits_first,
                     std::ostream& out) {
  auto line = [&](const char* key, const std::string& value) {
    out << key << std::string(18 - std::string(key).size(), ' ') << value
        << '\n';
  };
  line("sentences", std::to_string(report.sentence_count));
  line("tokens", std::to_string(report.token_count));
  line("oov", std::to_string(report.oov_count));
  line("log_prob_total", sfst::FormatWeight(report.log_prob_total));
  if (bits_first) {
    line("bits_per_symbol", sfst::FormatWeight(report.bits_per_symbol));
    line("perplexity", sfst::FormatWeight(report.perplexity));
  } else {
    line("perplexity", sfst::FormatWeight(report.perplexity));
    line("bits_per_symbol", sfst::FormatWeight(report.bits_per_symbol));
  }
  if (report.zero_prob_line) {
    line("zero_prob_line", std::to_string(*report.zero_prob_line));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic automata toolkit: KL-minimizing approximation of "
               "sequence models onto deterministic phi-WFA topologies"};
  app.require_subcommand(1);

  // approx
  CommonFlags approx_flags;
  sfst::ApproxConfig approx_cfg;
  std::int64_t approx_samples = 0;
  std::string approx_source, approx_topology;
  auto* approx = app.add_subcommand(
      "approx", "Approximate a stochastic (phi-)WFA onto a topology");
  AddCommonFlags(approx, &approx_flags);
  approx->add_option("--epsilon", approx_cfg.epsilon, "Companion weight floor");
  approx->add_option("--tol", approx_cfg.tol, "DC convergence tolerance");
  approx->add_option("--max-iters", approx_cfg.max_iters, "DC iteration cap");
  approx->add_option("--samples", approx_samples,
                     "Use sampled counting with this many samples");
  approx->add_option("--seed", approx_cfg.seed, "Sampling seed");
  approx->add_option("source", approx_source, "Source model file")->required();
  approx->add_option("topology", approx_topology, "Target topology file")->required();

  // count
  CommonFlags count_flags;
  std::int64_t count_samples = 0;
  std::uint64_t count_seed = 0;
  std::string count_source, count_topology;
  auto* count = app.add_subcommand(
      "count", "Expected transition counts of a source against a topology");
  AddCommonFlags(count, &count_flags);
  count->add_option("--samples", count_samples,
                    "Use sampled counting with this many samples");
  count->add_option("--seed", count_seed, "Sampling seed");
  count->add_option("source", count_source, "Source model file")->required();
  count->add_option("topology", count_topology, "Target topology file")->required();

  // normalize
  CommonFlags norm_flags;
  sfst::ApproxConfig norm_cfg;
  std::string norm_method = "kl_min";
  std::string norm_input;
  auto* normalize = app.add_subcommand(
      "normalize", "Normalize a count automaton into a stochastic one");
  AddCommonFlags(normalize, &norm_flags);
  normalize->add_option("--method", norm_method,
                        "kl_min (KL divergence minimization) or local");
  normalize->add_option("--epsilon", norm_cfg.epsilon, "Companion weight floor");
  normalize->add_option("--tol", norm_cfg.tol, "DC convergence tolerance");
  normalize->add_option("--max-iters", norm_cfg.max_iters, "DC iteration cap");
  normalize->add_option("counts", norm_input, "Counts automaton file")->required();

  // intersect
  CommonFlags intersect_flags;
  bool intersect_phi = false;
  std::string intersect_left, intersect_right;
  auto* intersect = app.add_subcommand("intersect", "Intersect two automata");
  AddCommonFlags(intersect, &intersect_flags);
  intersect->add_flag("--phi", intersect_phi,
                      "Phi-preserving intersection (targets with backoff)");
  intersect->add_option("left", intersect_left, "Source automaton")->required();
  intersect->add_option("right", intersect_right, "Target automaton")->required();

  // perplexity
  CommonFlags perp_flags;
  bool perp_bits = false;
  std::string perp_unk;
  std::string perp_model, perp_corpus;
  auto* perplexity = app.add_subcommand(
      "perplexity", "Perplexity of a stochastic model over a corpus");
  AddCommonFlags(perplexity, &perp_flags);
  perplexity->add_flag("--bits", perp_bits, "Emphasize bits per symbol");
  perplexity->add_option("--unk", perp_unk,
                         "Map unknown corpus symbols to this symbol");
  perplexity->add_option("model", perp_model, "Model file")->required();
  perplexity->add_option("corpus", perp_corpus, "Corpus file")->required();

  // randgen
  CommonFlags randgen_flags;
  std::int64_t randgen_n = 1;
  std::uint64_t randgen_seed = 0;
  int randgen_max_len = 10000;
  std::string randgen_model;
  auto* randgen = app.add_subcommand(
      "randgen", "Randomly generate sentences from a stochastic model");
  AddCommonFlags(randgen, &randgen_flags);
  randgen->add_option("--n", randgen_n, "Number of sentences");
  randgen->add_option("--seed", randgen_seed, "Seed");
  randgen->add_option("--max-len", randgen_max_len, "Length cutoff");
  randgen->add_option("model", randgen_model, "Model file")->required();

  // shortestdistance
  CommonFlags sd_flags;
  std::string sd_queue = "fifo";
  double sd_delta = 1e-12;
  int sd_max_sweeps = 10000;
  std::string sd_input;
  auto* shortestdistance = app.add_subcommand(
      "shortestdistance", "Per-state path-sum distances from the initial state");
  AddCommonFlags(shortestdistance, &sd_flags);
  shortestdistance->add_option("--queue", sd_queue, "topo or fifo")
      ->check(CLI::IsMember({"topo", "fifo"}));
  shortestdistance->add_option("--delta", sd_delta, "Fifo convergence delta");
  shortestdistance->add_option("--max-sweeps", sd_max_sweeps, "Fifo sweep cap");
  shortestdistance->add_option("input", sd_input, "Automaton file")->required();

  // trim
  CommonFlags trim_flags;
  std::string trim_input;
  auto* trim = app.add_subcommand(
      "trim", "Remove states on no allowed successful path");
  AddCommonFlags(trim, &trim_flags);
  trim->add_option("input", trim_input, "Automaton file")->required();

  // ngram-count
  SymbolId ngc_phi = 0;
  int ngc_order = 3;
  std::string ngc_corpus;
  auto* ngram_count = app.add_subcommand(
      "ngram-count", "k-gram counts of a corpus (text output)");
  ngram_count->add_option("--order", ngc_order, "Maximum gram length")
      ->check(CLI::PositiveNumber);
  ngram_count->add_option("--phi-label", ngc_phi, "Phi id for the implied table");
  ngram_count->add_option("corpus", ngc_corpus, "Corpus file")->required();

  // ngram-make
  SymbolId ngm_phi = 0;
  std::string ngm_method = "katz";
  std::string ngm_symbols_out;
  std::string ngm_counts;
  auto* ngram_make = app.add_subcommand(
      "ngram-make", "Build a smoothed model from k-gram counts");
  ngram_make->add_option("--method", ngm_method, "katz")
      ->check(CLI::IsMember({"katz"}));
  ngram_make->add_option("--phi-label", ngm_phi, "Phi id");
  ngram_make->add_option("--symbols", ngm_symbols_out,
                         "Write the derived symbol table to this file");
  ngram_make->add_option("counts", ngm_counts, "ngram-count output")->required();

  // ngram-prune
  CommonFlags ngp_flags;
  double ngp_theta = 0.0;
  std::string ngp_model, ngp_counts;
  auto* ngram_prune = app.add_subcommand(
      "ngram-prune", "Count-threshold pruning of a backoff topology");
  AddCommonFlags(ngram_prune, &ngp_flags);
  ngram_prune->add_option("--theta", ngp_theta, "Count threshold")->required();
  ngram_prune->add_option("model", ngp_model, "Topology or model file")->required();
  ngram_prune->add_option("counts", ngp_counts,
                          "Counts automaton aligned with the model")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*approx) {
      Automaton source = approx_flags.Load(approx_source);
      Automaton topology = approx_flags.Load(approx_topology);
      Automaton result =
          approx_samples > 0
              ? (approx_cfg.samples = approx_samples,
                 Approximate(sfst::WfaBackedModel(source), topology, approx_cfg))
              : Approximate(source, topology, approx_cfg);
      sfst::SerializeAutomaton(result, std::cout);
    } else if (*count) {
      Automaton source = count_flags.Load(count_source);
      Automaton topology = sfst::StripWeights(count_flags.Load(count_topology));
      sfst::ArcCounts counts;
      if (count_samples > 0) {
        sfst::SampledCounts sampled =
            CountSampled(sfst::WfaBackedModel(source), topology, count_samples,
                         count_seed);
        if (sampled.rejected > 0 || sampled.truncated > 0) {
          std::cerr << "warning: " << sampled.rejected << " rejected and "
                    << sampled.truncated << " truncated samples of "
                    << sampled.requested << '\n';
        }
        counts = sampled.counts;
      } else if (source.HasPhi() || topology.HasPhi()) {
        counts = CountPhi(source, topology);
      } else {
        counts = CountWfa(source, topology);
      }
      sfst::SerializeAutomaton(CountsToAutomaton(topology, counts), std::cout);
    } else if (*normalize) {
      Automaton counts = norm_flags.Load(norm_input);
      if (norm_method == "kl_min") {
        sfst::SerializeAutomaton(KlMinNormalize(counts, norm_cfg), std::cout);
      } else if (norm_method == "local") {
        sfst::SerializeAutomaton(LocalNormalize(counts), std::cout);
      } else if (norm_method == "global" || norm_method == "phi") {
        std::cerr << "normalize: method '" << norm_method
                  << "' is out of scope for this toolkit (use kl_min or local)\n";
        return 1;
      } else {
        std::cerr << "normalize: unknown method '" << norm_method << "'\n";
        return 1;
      }
    } else if (*intersect) {
      const std::string left_text = ReadFile(intersect_left);
      auto table = intersect_flags.TableFor(left_text);
      Automaton left = sfst::ParseAutomaton(left_text, table);
      Automaton right = sfst::ParseAutomaton(ReadFile(intersect_right), table);
      sfst::ProductAutomaton product = intersect_phi
                                           ? IntersectPhi(left, right)
                                           : IntersectWfa(left, right);
      sfst::SerializeAutomaton(Trim(product.machine), std::cout);
    } else if (*perplexity) {
      Automaton model = perp_flags.Load(perp_model);
      std::ifstream corpus_in(perp_corpus);
      if (!corpus_in) throw sfst::Error("cannot open " + perp_corpus);
      std::optional<std::string> unk;
      if (!perp_unk.empty()) unk = perp_unk;
      sfst::Corpus corpus = LoadCorpus(corpus_in, model.Symbols(), unk);
      sfst::WfaBackedModel backed(model);
      PrintEvalReport(Perplexity(backed, corpus), perp_bits, std::cout);
    } else if (*randgen) {
      Automaton model = randgen_flags.Load(randgen_model);
      sfst::WfaBackedModel backed(model);
      const SymbolId terminator = model.TerminatorLabel();
      for (std::int64_t j = 0; j < randgen_n; ++j) {
        sfst::CounterRng rng = sfst::CounterRng::ForSample(
            randgen_seed, static_cast<std::uint64_t>(j));
        auto sample = SampleOne(backed, rng, randgen_max_len);
        if (!sample) {
          std::cerr << "warning: sample " << j << " truncated at "
                    << randgen_max_len << " symbols, skipped\n";
          continue;
        }
        bool first = true;
        for (SymbolId x : *sample) {
          if (x == terminator) break;
          const std::string* name = model.Symbols().Find(x);
          if (!first) std::cout << ' ';
          std::cout << (name ? *name : std::to_string(x));
          first = false;
        }
        std::cout << '\n';
      }
    } else if (*shortestdistance) {
      Automaton input = sd_flags.Load(sd_input);
      sfst::QueueDiscipline queue =
          sd_queue == "topo" ? sfst::QueueDiscipline::Topological()
                             : sfst::QueueDiscipline::Fifo(sd_delta, sd_max_sweeps);
      sfst::Graph graph;
      sfst::Semiring semiring = sfst::Semiring::kPositiveReal;
      if (input.HasPhi()) {
        // Allowed-path semantics: phi arcs become epsilon with negative
        // compensation, distances over the real semiring.
        graph = CompensateAutomaton(input).ToGraph();
        semiring = sfst::Semiring::kReal;
      } else {
        graph = GraphFromAutomaton(input);
      }
      sfst::DistanceResult result = ShortestDistance(graph, queue, semiring);
      for (sfst::StateId q = 0; q < input.NumStates(); ++q) {
        std::cout << q << ' '
                  << sfst::FormatWeight(result.distance[static_cast<std::size_t>(q)])
                  << '\n';
      }
      if (queue.kind == sfst::QueueDiscipline::kFifo) {
        std::cerr << "fifo sweeps: " << result.sweeps
                  << ", residual: " << result.max_residual << '\n';
      }
    } else if (*trim) {
      sfst::SerializeAutomaton(Trim(trim_flags.Load(trim_input)), std::cout);
    } else if (*ngram_count) {
      std::ifstream corpus_in(ngc_corpus);
      if (!corpus_in) throw sfst::Error("cannot open " + ngc_corpus);
      // Vocabulary from the corpus itself, ids in lexicographic order.
      std::string text((std::istreambuf_iterator<char>(corpus_in)),
                       std::istreambuf_iterator<char>());
      std::set<std::string> vocab;
      {
        std::istringstream scan(text);
        std::string tok;
        while (scan >> tok) {
          if (tok != SymbolTable::kTerminatorSymbol) vocab.insert(tok);
        }
      }
      auto table = std::make_shared<SymbolTable>(ngc_phi);
      table->AddSymbol("<phi>", ngc_phi);
      table->AddSymbol(SymbolTable::kTerminatorSymbol);
      for (const std::string& w : vocab) table->AddSymbol(w);
      std::istringstream corpus_text(text);
      sfst::Corpus corpus = LoadCorpus(corpus_text, *table);
      sfst::NgramCounts counts = CountNgrams(corpus, ngc_order, *table);
      WriteNgramCounts(counts, *table, std::cout);
    } else if (*ngram_make) {
      std::ifstream counts_in(ngm_counts);
      if (!counts_in) throw sfst::Error("cannot open " + ngm_counts);
      auto [counts, table] = sfst::ReadNgramCounts(counts_in, ngm_phi);
      Automaton model = KatzModel(counts, table);
      if (!ngm_symbols_out.empty()) {
        std::ofstream sym_out(ngm_symbols_out);
        if (!sym_out) throw sfst::Error("cannot write " + ngm_symbols_out);
        table->Write(sym_out);
      }
      sfst::SerializeAutomaton(model, std::cout);
    } else if (*ngram_prune) {
      const std::string model_text = ReadFile(ngp_model);
      auto table = ngp_flags.TableFor(model_text);
      Automaton model = sfst::ParseAutomaton(model_text, table);
      Automaton counts_fst = sfst::ParseAutomaton(ReadFile(ngp_counts), table);
      // The counts automaton must share the model's structure; state
      // numbering may differ between the two files.
      auto iso = FindIsomorphism(sfst::StripWeights(model),
                                 sfst::StripWeights(counts_fst));
      if (!iso) {
        throw sfst::Error("ngram-prune: counts automaton does not match the model");
      }
      sfst::ArcCounts aligned(model);
      for (sfst::StateId q = 0; q < model.NumStates(); ++q) {
        auto arcs = counts_fst.Arcs((*iso)[static_cast<std::size_t>(q)]);
        for (std::size_t k = 0; k < arcs.size(); ++k) {
          aligned.At(q, k) = arcs[k].weight;
        }
      }
      sfst::SerializeAutomaton(
          ThresholdPruneTopology(sfst::StripWeights(model), aligned, ngp_theta),
          std::cout);
    }
  } catch (const sfst::Error& e) {
    std::cerr << "sfst: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
