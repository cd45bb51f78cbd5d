// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "warmstart/batcher.hpp"
#include "warmstart/corpus.hpp"
#include "warmstart/masking.hpp"
#include "warmstart/memplan.hpp"
#include "warmstart/schedule.hpp"
#include "warmstart/translate.hpp"
#include "warmstart/transplant.hpp"
#include "warmstart/vocab.hpp"

namespace py = pybind11;
using namespace warmstart;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::DimensionMismatch, "embedding array must be 2-D");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto dim = static_cast<std::size_t>(a.shape(1));
  return EmbeddingMatrix(rows, dim, std::vector<float>(a.data(), a.data() + rows * dim));
}

FloatArray to_array(const EmbeddingMatrix& m) {
  FloatArray out({m.rows(), m.dim()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::array_t<TokenId> block(const std::vector<TokenId>& ids, std::size_t rows, std::size_t cols) {
  py::array_t<TokenId> out({rows, cols});
  std::copy(ids.begin(), ids.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> mask_block(const std::vector<std::uint8_t>& m, std::size_t rows, std::size_t cols) {
  py::array_t<std::uint8_t> out({rows, cols});
  std::copy(m.begin(), m.end(), out.mutable_data());
  return out;
}

py::tuple rational(const Rational& r) { return py::make_tuple(r.num, r.den); }

/// Lets a Python callable `fn(list[str]) -> list[str | None]` act as a provider.
class CallableProvider final : public TranslationProvider {
public:
  using Fn = std::function<std::vector<std::optional<std::string>>(const std::vector<std::string>&)>;
  CallableProvider(Fn fn, std::string name, std::size_t batch) : fn_(std::move(fn)), name_(std::move(name)), batch_(batch) {}

  std::string name() const override { return name_; }
  std::size_t max_batch() const override { return batch_; }
  std::vector<std::optional<std::string>> translate_batch(std::span<const std::string> texts) override {
    py::gil_scoped_acquire gil;
    return fn_(std::vector<std::string>(texts.begin(), texts.end()));
  }

private:
  Fn fn_;
  std::string name_;
  std::size_t batch_;
};

py::dict report_dict(const TransplantReport& r) {
  py::dict d;
  d["total_tokens"] = r.total_tokens;
  d["translated_count"] = r.translated_count;
  d["failed_count"] = r.failed_count;
  d["bypassed_count"] = r.bypassed_count;
  d["specials_copied"] = r.specials_copied;
  d["total_pieces"] = r.total_pieces;
  d["mean_pieces_per_token"] = rational(r.mean_pieces_per_token);
  d["unk_only_count"] = r.unk_only_count;
  d["single_piece_count"] = r.single_piece_count;
  d["notes"] = r.notes;
  return d;
}

py::dict memory_dict(const memplan::MemoryReport& r) {
  py::dict d;
  d["param_count"] = r.param_count;
  d["precision"] = std::string(memplan::to_string(r.precision));
  d["offload"] = r.offload;
  d["weights_bytes"] = r.weights_bytes;
  d["gradients_bytes"] = r.gradients_bytes;
  d["optimizer_bytes"] = r.optimizer_bytes;
  d["optimizer_location"] = r.optimizer_location == memplan::Location::Gpu ? "GPU" : "CPU";
  d["gpu_bytes"] = r.gpu_bytes;
  d["cpu_bytes"] = r.cpu_bytes;
  if (r.fit) {
    d["per_gpu_bytes"] = r.fit->per_gpu_bytes;
    d["fits"] = r.fit->fits;
    d["headroom_fraction"] = r.fit->headroom_fraction;
  }
  d["notes"] = r.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_warmstart, m) {
  m.doc() = "Warm-start toolkit: embedding transplant, corpus chunking, dynamic masking, batching, "
            "learning-rate schedule and memory planning";
  m.attr("__version__") = WARMSTART_VERSION;

  py::exception<Error>(m, "WarmstartError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto type = py::module_::import("warmstart._warmstart").attr("WarmstartError");
      PyErr_SetString(type.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  // vocab
  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init([](std::vector<std::string> tokens, TokenId pad, TokenId eos, TokenId unk, std::uint32_t sentinels) {
             return Vocabulary(std::move(tokens), SpecialIds{pad, eos, unk, sentinels});
           }),
           py::arg("tokens"), py::arg("pad_id") = 0, py::arg("eos_id") = 1, py::arg("unk_id") = 2,
           py::arg("sentinel_count") = 100)
      .def("__len__", &Vocabulary::size)
      .def("token", &Vocabulary::token)
      .def("find", &Vocabulary::find)
      .def("sentinel_id", &Vocabulary::sentinel_id)
      .def("is_special", &Vocabulary::is_special)
      .def_property_readonly("tokens", &Vocabulary::tokens)
      .def_property_readonly("pad_id", &Vocabulary::pad_id)
      .def_property_readonly("eos_id", &Vocabulary::eos_id)
      .def_property_readonly("unk_id", &Vocabulary::unk_id)
      .def_property_readonly("sentinel_count", &Vocabulary::sentinel_count);
  m.def("load_vocab", [](const std::filesystem::path& path, TokenId pad, TokenId eos, TokenId unk, std::uint32_t sentinels) {
          return load_vocab(path, SpecialIds{pad, eos, unk, sentinels});
        },
        py::arg("path"), py::arg("pad_id") = 0, py::arg("eos_id") = 1, py::arg("unk_id") = 2,
        py::arg("sentinel_count") = 100);
  m.def("tokenize_greedy", &tokenize_greedy, py::arg("vocab"), py::arg("text"));
  m.def("detokenize", [](const Vocabulary& v, const std::vector<TokenId>& ids) { return detokenize(v, ids); },
        py::arg("vocab"), py::arg("ids"));

  // translate
  m.def("normalize_token", [](const std::string& t) { return normalize_token(t); }, py::arg("token"));
  m.def("needs_translation", [](const std::string& t) { return needs_translation(t); }, py::arg("normalized"));

  py::class_<TranslationProvider>(m, "TranslationProvider").def_property_readonly("name", &TranslationProvider::name);
  py::class_<DictionaryProvider, TranslationProvider>(m, "DictionaryProvider")
      .def(py::init<std::unordered_map<std::string, std::string>>(), py::arg("entries"))
      .def_static("from_file", &DictionaryProvider::from_file, py::arg("path"));
  py::class_<IdentityProvider, TranslationProvider>(m, "IdentityProvider").def(py::init<>());
  py::class_<CallableProvider, TranslationProvider>(m, "CallableProvider")
      .def(py::init<CallableProvider::Fn, std::string, std::size_t>(), py::arg("fn"), py::arg("name") = "python",
           py::arg("max_batch") = 64);

  py::class_<TranslationTable>(m, "TranslationTable")
      .def(py::init<>())
      .def_static("load", &TranslationTable::load, py::arg("path"))
      .def_static("parse", &TranslationTable::parse, py::arg("text"))
      .def("save", &TranslationTable::save, py::arg("path"))
      .def("serialize", &TranslationTable::serialize)
      .def("__len__", &TranslationTable::size)
      .def("find", [](const TranslationTable& t, const std::string& key) -> py::object {
             auto e = t.find(key);
             if (!e) return py::none();
             return py::make_tuple(e->outcome.ok(), e->outcome.text, e->provider);
           })
      .def("insert", [](TranslationTable& t, const std::string& key, bool translated, const std::string& text,
                        const std::string& provider) {
             t.insert(key, translated ? TranslationOutcome::translated(text) : TranslationOutcome::failed(text), provider);
           },
           py::arg("key"), py::arg("translated"), py::arg("text"), py::arg("provider") = "python");
  m.def("lookup_or_fetch", [](TranslationTable& table, TranslationProvider& provider, const std::string& token, bool retry_failed) {
          FetchOptions opts;
          opts.retry_failed = retry_failed;
          py::gil_scoped_release release;
          auto o = lookup_or_fetch(table, provider, token, opts);
          return std::make_pair(o.ok(), o.text);
        },
        py::arg("table"), py::arg("provider"), py::arg("token"), py::arg("retry_failed") = false);
  m.def("fill_table", [](TranslationTable& table, TranslationProvider& provider, const std::vector<std::string>& tokens,
                         bool retry_failed) {
          FetchOptions opts;
          opts.retry_failed = retry_failed;
          FillStats s;
          {
            py::gil_scoped_release release;
            s = fill_table(table, provider, tokens, opts);
          }
          py::dict d;
          d["requested"] = s.requested;
          d["cache_hits"] = s.cache_hits;
          d["bypassed"] = s.bypassed;
          d["fetched"] = s.fetched;
          d["translated"] = s.translated;
          d["failed"] = s.failed;
          return d;
        },
        py::arg("table"), py::arg("provider"), py::arg("tokens"), py::arg("retry_failed") = false);

  // transplant
  m.def("map_token", [](const std::string& token, bool translated, const std::string& text, const Vocabulary& src) {
          return map_token(token, translated ? TranslationOutcome::translated(text) : TranslationOutcome::failed(text), src);
        },
        py::arg("target_token"), py::arg("translated"), py::arg("text"), py::arg("src"));
  m.def("transplant", [](const FloatArray& emb, const Vocabulary& src, const Vocabulary& tgt, const TranslationTable& table) {
          auto result = transplant(to_matrix(emb), src, tgt, table);
          return py::make_tuple(to_array(result.embeddings), report_dict(result.report));
        },
        py::arg("src_emb"), py::arg("src"), py::arg("tgt"), py::arg("table"));
  m.def("read_embeddings", [](const std::filesystem::path& p) { return to_array(read_embeddings(p)); }, py::arg("path"));
  m.def("write_embeddings", [](const FloatArray& a, const std::filesystem::path& p) { write_embeddings(to_matrix(a), p); },
        py::arg("array"), py::arg("path"));

  // corpus
  m.def("chunk_corpus", [](const std::vector<std::vector<TokenId>>& docs, std::size_t seq_len, std::size_t min_tail) {
          std::vector<std::vector<TokenId>> out;
          for (auto& s : chunk_corpus(docs, {seq_len, min_tail})) out.push_back(std::move(s.ids));
          return out;
        },
        py::arg("docs"), py::arg("seq_len") = 512, py::arg("min_tail") = 16);
  m.def("write_store", [](const std::filesystem::path& p, const std::vector<std::vector<TokenId>>& seqs, bool index) {
          SequenceStoreWriter w(p, index);
          for (const auto& s : seqs) w.append(s);
          return w.finish();
        },
        py::arg("path"), py::arg("sequences"), py::arg("write_index") = true);
  m.def("read_store", [](const std::filesystem::path& p) {
          SequenceStoreReader r(p);
          std::vector<std::vector<TokenId>> out;
          for (std::uint64_t i = 0; i < r.count(); ++i) out.push_back(r.read(i).ids);
          return out;
        },
        py::arg("path"));

  // masking
  py::enum_<MaskMode>(m, "MaskMode").value("SPAN", MaskMode::Span).value("IID", MaskMode::Iid);
  m.def("mask_counts", [](std::size_t len, double rate, double mean_span, MaskMode mode) {
          auto c = mask_counts(len, {rate, mean_span, mode});
          return std::make_pair(c.num_masked, c.num_spans);
        },
        py::arg("length"), py::arg("rate") = 0.15, py::arg("mean_span") = 3.0, py::arg("mode") = MaskMode::Span);
  m.def("draw_mask", [](std::size_t len, std::uint64_t seed, std::uint64_t epoch, std::uint64_t seq_index, double rate,
                        double mean_span, MaskMode mode) {
          std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
          for (const auto& s : draw_mask(len, {rate, mean_span, mode}, {seed, epoch, seq_index})) out.emplace_back(s.start, s.length);
          return out;
        },
        py::arg("length"), py::arg("seed"), py::arg("epoch"), py::arg("seq_index"), py::arg("rate") = 0.15,
        py::arg("mean_span") = 3.0, py::arg("mode") = MaskMode::Span);
  m.def("apply_span_corruption", [](const std::vector<TokenId>& seq, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& spans,
                                    const Vocabulary& v) {
          std::vector<Span> s;
          for (auto [start, length] : spans) s.push_back({start, length});
          auto ex = apply_span_corruption(seq, s, v);
          return std::make_pair(ex.input_ids, ex.target_ids);
        },
        py::arg("sequence"), py::arg("spans"), py::arg("vocab"));

  // batcher
  m.def("plan_accumulation", [](std::size_t effective, std::size_t micro) {
          auto p = plan_accumulation(effective, micro);
          return py::make_tuple(p.micro_batch_size, p.accumulation_steps, p.effective_batch);
        },
        py::arg("effective") = 128, py::arg("micro") = 16);
  m.def("assemble", [](const std::vector<std::pair<std::vector<TokenId>, std::vector<TokenId>>>& pairs, std::size_t micro, TokenId pad) {
          std::vector<MaskedExample> exs;
          for (const auto& [in, tgt] : pairs) exs.push_back({in, tgt});
          auto b = assemble(exs, micro, pad);
          auto eff = padding_efficiency(b);
          py::dict d;
          d["inputs"] = block(b.inputs, b.rows, b.width_in);
          d["targets"] = block(b.targets, b.rows, b.width_tgt);
          d["input_mask"] = mask_block(b.input_mask, b.rows, b.width_in);
          d["target_mask"] = mask_block(b.target_mask, b.rows, b.width_tgt);
          d["efficiency_input"] = rational(eff.input);
          d["efficiency_target"] = rational(eff.target);
          d["efficiency"] = rational(eff.combined);
          return d;
        },
        py::arg("examples"), py::arg("micro") = 16, py::arg("pad_id") = 0);

  // schedule
  m.def("lr_at", [](std::uint64_t step, std::uint64_t total, double peak, std::uint64_t warmup, bool inverse_sqrt) {
          LrSchedule s{peak, warmup, total, inverse_sqrt ? WarmupShape::InverseSqrt : WarmupShape::Linear};
          return lr_at(s, step);
        },
        py::arg("step"), py::arg("total_steps"), py::arg("peak") = 4e-3, py::arg("warmup_steps") = 5000,
        py::arg("inverse_sqrt") = false);
  m.def("total_steps_for", &total_steps_for, py::arg("epochs"), py::arg("sequences"), py::arg("effective_batch") = 128);

  // memplan
  m.def("estimate_memory", [](std::uint64_t params, const std::string& precision, bool offload) {
          return memory_dict(memplan::estimate({params}, memplan::parse_precision(precision), offload));
        },
        py::arg("params"), py::arg("precision") = "fp32", py::arg("offload") = false);
  m.def("recommend", [](std::uint64_t params, std::uint32_t gpus, double gpu_mem_gb, double ram_gb, bool nvlink, int pcie_gen) {
          memplan::HardwareSpec hw;
          hw.gpu_count = gpus;
          hw.gpu_memory_bytes = static_cast<std::uint64_t>(gpu_mem_gb * 1e9);
          hw.system_ram_bytes = static_cast<std::uint64_t>(ram_gb * 1e9);
          hw.nvlink_pairs = nvlink;
          hw.pcie_generation = pcie_gen;
          auto plan = memplan::recommend({params}, hw);
          std::vector<std::string> required;
          for (const auto& r : plan.required) required.push_back(r.text);
          py::dict d;
          d["required"] = required;
          d["notes"] = plan.notes;
          d["feasible"] = plan.feasible;
          d["final"] = memory_dict(plan.final_report);
          return d;
        },
        py::arg("params"), py::arg("gpus") = 1, py::arg("gpu_mem_gb") = 40.0, py::arg("ram_gb") = 128.0,
        py::arg("nvlink") = false, py::arg("pcie_gen") = 4);

  // cli
  m.def("run_cli", [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
