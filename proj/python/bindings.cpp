// bindings.cpp -- pybind11 module over the decoding pipeline
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "pbmt/bleu.hpp"
#include "pbmt/common.hpp"
#include "pbmt/driver.hpp"
#include "pbmt/oracle.hpp"
#include "pbmt/search.hpp"
#include "pbmt/synth.hpp"
#include "pbmt/tm.hpp"

namespace py = pybind11;
using namespace pbmt;

namespace {

// One loaded model set plus a reusable search context. Decoding mutates the
// context, so calls are serialized per Decoder; decode_corpus fans out its
// own worker contexts internally.
class PyDecoder {
 public:
  PyDecoder(const std::string& table, const std::string& lm,
            const std::string& weights, const std::string& separate_lexro,
            std::optional<std::size_t> cache_size, std::size_t threads,
            std::size_t pop_limit, int distortion_limit, std::size_t beam,
            const std::string& stack, std::size_t max_sentence_length) {
    config_.table_dir = table;
    config_.lm_path = lm;
    config_.weights_path = weights;
    config_.separate_lexro_path = separate_lexro;
    config_.cache_size = cache_size;
    config_.threads = threads;
    config_.search.pop_limit = pop_limit == 0 ? SearchParams::kUnlimitedPops
                                              : pop_limit;
    config_.search.distortion_limit = distortion_limit;
    config_.search.beam_size = beam;
    config_.search.stack = stack_config_from_name(stack);
    config_.search.max_sentence_length = max_sentence_length;
    config_.validate();
    models_ = LoadedModels::load(config_);
  }

  py::dict decode(const std::string& line) {
    DecodeResult r;
    {
      py::gil_scoped_release release;
      r = pbmt::decode(models_.view(), split_tokens(line), config_.search,
                       context_);
      context_.reset_sentence();
    }
    if (!r.ok) fail("decode failed: ", r.error);
    py::dict out;
    out["text"] = r.text;
    out["score"] = r.score;
    out["partial"] = r.stats.partial;
    py::list features;
    for (double f : r.features) features.append(f);
    out["features"] = features;
    out["pops"] = r.stats.pops;
    out["hypotheses"] = r.stats.created;
    return out;
  }

  py::tuple decode_corpus(const std::vector<std::string>& lines) {
    std::vector<std::string> output;
    RunReport report;
    {
      py::gil_scoped_release release;
      report = run_corpus(models_, config_, lines, output);
    }
    py::dict stats;
    stats["sentences"] = report.sentences;
    stats["errors"] = report.errors;
    stats["partials"] = report.partials;
    stats["source_words"] = report.source_words;
    stats["words_per_second"] = report.words_per_second;
    stats["cache_hit_rate"] = report.cache_hit_rate;
    stats["threads"] = report.threads;
    stats["scores"] = report.sentence_scores;
    py::list errors;
    for (const auto& [index, message] : report.sentence_errors) {
      py::dict e;
      e["line"] = index;
      e["error"] = message;
      errors.append(e);
    }
    stats["sentence_errors"] = errors;
    return py::make_tuple(output, stats);
  }

  py::dict exhaustive(const std::string& line,
                      std::optional<int> distortion_limit) {
    OracleResult r;
    {
      py::gil_scoped_release release;
      r = exhaustive_decode(
          models_.view(), split_tokens(line),
          distortion_limit.value_or(config_.search.distortion_limit));
    }
    if (!r.ok) fail("exhaustive decode failed: ", r.error);
    py::dict out;
    out["text"] = r.text;
    out["score"] = r.score;
    out["derivations"] = r.derivations;
    return out;
  }

 private:
  DecoderConfig config_;
  LoadedModels models_;
  SearchContext context_;
};

class PyLanguageModel {
 public:
  explicit PyLanguageModel(const std::string& path)
      : model_(NGramModel::load_arpa(path)) {}

  double score(const std::string& sentence) const {
    std::vector<LmWordId> ids;
    for (const auto& token : split_tokens(sentence))
      ids.push_back(model_.word_id(token));
    auto [phrase, state] = model_.score_phrase(model_.begin_state(), ids);
    auto [end, final_state] = model_.score_word(state, model_.end_id());
    (void)final_state;
    return phrase + end;
  }

  std::size_t order() const { return model_.order(); }

 private:
  NGramModel model_;
};

py::dict report_dict(const BuildReport& r) {
  py::dict out;
  out["rules_read"] = r.rules_read;
  out["rules_kept"] = r.rules_kept;
  out["rules_pruned"] = r.rules_pruned;
  out["source_phrases"] = r.source_phrases;
  out["max_source_len"] = r.max_source_len;
  out["lexro_entries"] = r.lexro_entries;
  out["lexro_missing"] = r.lexro_missing;
  out["cache_entries"] = r.cache_entries;
  out["counts_missing"] = r.counts_missing;
  out["max_quantization_error"] = r.max_quantization_error;
  out["payload_bytes"] = r.payload_bytes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_pbmt, m) {
  m.doc() = "phrase-based translation decoder";

  m.def(
      "compile_table",
      [](const std::string& phrase_table, const std::string& out_dir,
         const std::string& lexro, const std::string& counts,
         std::size_t table_limit, std::size_t cache_size, bool compressed) {
        BuildInputs inputs;
        inputs.phrase_table = phrase_table;
        inputs.lexro = lexro;
        inputs.counts = counts;
        BuildOptions options;
        options.table_limit = table_limit;
        options.cache_size = cache_size;
        options.codec = compressed ? Codec::kCompressed : Codec::kIdentity;
        BuildReport report;
        {
          py::gil_scoped_release release;
          report = build_rule_table(inputs, options, out_dir);
        }
        return report_dict(report);
      },
      py::arg("phrase_table"), py::arg("out_dir"), py::arg("lexro") = "",
      py::arg("counts") = "", py::arg("table_limit") = 100,
      py::arg("cache_size") = 0, py::arg("compressed") = false,
      "Compile a text phrase table (plus optional reordering and count "
      "files) into a binary model directory.");

  m.def(
      "generate_synthetic",
      [](const std::string& out_dir, std::uint64_t seed,
         std::size_t sentences, std::size_t source_vocab,
         std::size_t target_vocab, double avg_len, std::size_t max_len,
         double oov_rate) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.sentences = sentences;
        spec.source_vocab = source_vocab;
        spec.target_vocab = target_vocab;
        spec.avg_len = avg_len;
        spec.max_len = max_len;
        spec.oov_rate = oov_rate;
        SyntheticFiles files = generate_synthetic(spec, out_dir);
        py::dict out;
        out["phrase_table"] = files.phrase_table;
        out["lexro"] = files.lexro;
        out["counts"] = files.counts;
        out["lm"] = files.lm;
        out["corpus"] = files.corpus;
        out["corpus_words"] = files.corpus_words;
        return out;
      },
      py::arg("out_dir"), py::arg("seed") = 1, py::arg("sentences") = 1000,
      py::arg("source_vocab") = 200, py::arg("target_vocab") = 200,
      py::arg("avg_len") = 7.3, py::arg("max_len") = 30,
      py::arg("oov_rate") = 0.0,
      "Write a seeded synthetic corpus, phrase table, reordering table, "
      "counts file and language model into out_dir.");

  m.def(
      "bleu",
      [](const std::vector<std::string>& hypotheses,
         const std::vector<std::string>& references) {
        BleuResult r = corpus_bleu(hypotheses, references);
        py::dict out;
        out["bleu"] = r.bleu;
        out["precisions"] = std::vector<double>(r.precisions.begin(),
                                                r.precisions.end());
        out["brevity_penalty"] = r.brevity_penalty;
        out["hyp_words"] = r.hyp_words;
        out["ref_words"] = r.ref_words;
        return out;
      },
      py::arg("hypotheses"), py::arg("references"),
      "Corpus-level BLEU-4 of hypothesis lines against reference lines.");

  py::class_<PyLanguageModel>(m, "LanguageModel")
      .def(py::init<const std::string&>(), py::arg("path"),
           "Load an ARPA n-gram model.")
      .def("score", &PyLanguageModel::score, py::arg("sentence"),
           "Log10 probability of the tokenized sentence, end token included.")
      .def_property_readonly("order", &PyLanguageModel::order);

  py::class_<PyDecoder>(m, "Decoder")
      .def(py::init<const std::string&, const std::string&,
                    const std::string&, const std::string&,
                    std::optional<std::size_t>, std::size_t, std::size_t, int,
                    std::size_t, const std::string&, std::size_t>(),
           py::arg("table"), py::arg("lm"), py::arg("weights"),
           py::arg("separate_lexro") = "",
           py::arg("cache_size") = py::none(), py::arg("threads") = 1,
           py::arg("pop_limit") = 400, py::arg("distortion_limit") = 6,
           py::arg("beam") = 0, py::arg("stack") = "coverage-endpos",
           py::arg("max_sentence_length") = 200,
           "Load a compiled table, language model and weights. pop_limit 0 "
           "means unlimited.")
      .def("decode", &PyDecoder::decode, py::arg("line"),
           "Translate one pre-tokenized line; returns text, score, features.")
      .def("decode_corpus", &PyDecoder::decode_corpus, py::arg("lines"),
           "Translate lines in order; returns (translations, stats).")
      .def("exhaustive", &PyDecoder::exhaustive, py::arg("line"),
           py::arg("distortion_limit") = py::none(),
           "Reference decode by full enumeration; short sentences only.");
}
