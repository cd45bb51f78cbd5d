// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>

#include "warmstart/batcher.hpp"
#include "warmstart/corpus.hpp"
#include "warmstart/error.hpp"
#include "warmstart/masking.hpp"
#include "warmstart/memplan.hpp"
#include "warmstart/schedule.hpp"
#include "warmstart/translate.hpp"
#include "warmstart/transplant.hpp"
#include "warmstart/vocab.hpp"

namespace warmstart::cli {

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (pos < text.size()) {
    ++lineno;
    auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::Config, "config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace {

struct CommonArgs {
  std::string config;
  std::string run_log = "warmstart-runs.log";
  std::uint64_t seed = 0;
};

struct VocabArgs {
  TokenId pad = 0;
  TokenId eos = 1;
  TokenId unk = 2;
  std::uint32_t sentinels = 100;

  SpecialIds specials() const { return {pad, eos, unk, sentinels}; }
};

struct TransplantArgs {
  std::string src_emb, src_vocab, tgt_vocab, cache, out, report;
  std::string provider;
  std::string dict_file;
  std::string remote_url;
  std::string source_lang = "da";
  std::string target_lang = "en";
  std::string rate_limit;
  std::uint64_t timeout_ms = 10000;
  std::size_t batch_size = 64;
  int max_retries = 3;
  bool retry_failed = false;
};

struct CorpusArgs {
  std::string vocab, in, out;
  std::size_t seq_len = 512;
  std::size_t min_tail = 16;
  bool no_index = false;
};

struct SampleArgs {
  std::string store, vocab, out, report;
  std::string format = "text";
  std::uint64_t epoch = 0;
  std::string mode = "span";
  double rate = 0.15;
  double mean_span = 3.0;
  std::size_t micro_batch = 16;
  std::size_t effective_batch = 128;
  bool sort_by_length = false;
};

struct LrArgs {
  double peak = 4e-3;
  std::uint64_t warmup = 5000;
  std::uint64_t total = 0;
  std::uint64_t epochs = 0;
  std::uint64_t sequences = 0;
  std::string store;
  std::size_t effective_batch = 128;
  std::uint64_t every = 1;
  std::string emit = "csv";
  std::string warmup_shape = "linear";
  std::string out;
};

struct MemArgs {
  std::uint64_t params = 0;
  std::string precision = "fp32";
  bool offload = false;
  std::uint32_t gpus = 1;
  double gpu_mem_gb = 40.0;
  double ram_gb = 128.0;
  bool nvlink = false;
  int pcie_gen = 4;
};

struct StatsArgs {
  std::string store;
};

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<std::string> scan_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with(flag + "=")) return args[i].substr(flag.size() + 1);
  }
  return std::nullopt;
}

void add_vocab_options(CLI::App* sub, VocabArgs& v) {
  sub->add_option("--pad-id", v.pad, "Id of the padding token");
  sub->add_option("--eos-id", v.eos, "Id of the end-of-sequence token");
  sub->add_option("--unk-id", v.unk, "Id of the unknown token");
  sub->add_option("--sentinels", v.sentinels, "Number of sentinel tokens at the top of the vocabulary");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + path);
  return out;
}

std::string join_ids(std::span<const TokenId> ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(ids[i]);
  }
  return out;
}

double parse_rate_limit(const std::string& text) {
  if (text.empty()) return 0.0;
  std::string number = text;
  if (number.ends_with("/s")) number.resize(number.size() - 2);
  try {
    std::size_t used = 0;
    double value = std::stod(number, &used);
    if (used != number.size() || value < 0) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, "bad --rate-limit \"" + text + "\", expected N/s");
  }
}

// ---------------------------------------------------------------------------

int do_transplant(const TransplantArgs& a, const VocabArgs& v, const CommonArgs& common,
                  std::ostream& out) {
  auto src = load_vocab(a.src_vocab, v.specials());
  auto tgt = load_vocab(a.tgt_vocab, v.specials());
  auto src_emb = read_embeddings(a.src_emb);

  TranslationTable table;
  if (!a.cache.empty() && std::filesystem::exists(a.cache)) table = TranslationTable::load(a.cache);

  std::unique_ptr<TranslationProvider> provider;
  if (a.provider == "dict") {
    if (a.dict_file.empty()) throw Error(ErrorCode::Config, "--provider dict needs --dict-file");
    provider = std::make_unique<DictionaryProvider>(DictionaryProvider::from_file(a.dict_file));
  } else if (a.provider == "identity") {
    provider = std::make_unique<IdentityProvider>();
  } else if (a.provider == "remote") {
    if (a.remote_url.empty()) throw Error(ErrorCode::Config, "--provider remote needs --remote-url");
    RemoteProvider::Options opts;
    opts.url = a.remote_url;
    opts.source_lang = a.source_lang;
    opts.target_lang = a.target_lang;
    opts.rate_limit_per_s = parse_rate_limit(a.rate_limit);
    opts.timeout = std::chrono::milliseconds(a.timeout_ms);
    opts.batch_size = a.batch_size;
    opts.max_retries = a.max_retries;
    provider = std::make_unique<RemoteProvider>(opts);
  }

  nlohmann::json fill_json = nullptr;
  if (provider) {
    if (!a.cache.empty()) table.attach_journal(a.cache);
    std::vector<std::string> tokens;
    for (TokenId t = 0; t < tgt.size(); ++t) {
      if (!tgt.is_special(t)) tokens.push_back(tgt.token(t));
    }
    FetchOptions fetch;
    fetch.retry_failed = a.retry_failed;
    fetch.boundary_marker = tgt.boundary_marker();
    auto stats = fill_table(table, *provider, tokens, fetch);
    fill_json = {{"provider", provider->name()},    {"requested", stats.requested},
                 {"cache_hits", stats.cache_hits},  {"bypassed", stats.bypassed},
                 {"fetched", stats.fetched},        {"translated", stats.translated},
                 {"failed", stats.failed}};
  }
  if (!a.cache.empty()) table.save(a.cache);

  auto result = transplant(src_emb, src, tgt, table);
  write_embeddings(result.embeddings, a.out);

  const auto& r = result.report;
  if (!a.report.empty()) {
    nlohmann::json j;
    j["total_tokens"] = r.total_tokens;
    j["translated_count"] = r.translated_count;
    j["failed_count"] = r.failed_count;
    j["bypassed_count"] = r.bypassed_count;
    j["specials_copied"] = r.specials_copied;
    j["total_pieces"] = r.total_pieces;
    j["mean_pieces_per_token"] = {{"num", r.mean_pieces_per_token.num},
                                  {"den", r.mean_pieces_per_token.den},
                                  {"value", r.mean_pieces_per_token.value()}};
    j["unk_only_count"] = r.unk_only_count;
    j["single_piece_count"] = r.single_piece_count;
    j["rows"] = result.embeddings.rows();
    j["dim"] = result.embeddings.dim();
    j["notes"] = r.notes;
    j["fill"] = fill_json;
    j["seed"] = common.seed;
    j["version"] = WARMSTART_VERSION;
    auto file = open_output(a.report);
    file << j.dump(2) << '\n';
    if (!file) throw Error(ErrorCode::Io, "write failure on " + a.report);
  }

  out << fmt::format("transplanted {} rows x {} dims: translated={} failed={} bypassed={} specials={} "
                     "mean_pieces={} unk_only={}\n",
                     result.embeddings.rows(), result.embeddings.dim(), r.translated_count,
                     r.failed_count, r.bypassed_count, r.specials_copied,
                     r.mean_pieces_per_token.str(), r.unk_only_count);
  return 0;
}

int do_prepare_corpus(const CorpusArgs& a, const VocabArgs& v, std::ostream& out) {
  auto vocab = load_vocab(a.vocab, v.specials());
  CorpusChunker chunker({a.seq_len, a.min_tail});
  SequenceStoreWriter writer(a.out, !a.no_index);
  std::uint64_t tokens = 0;
  for_each_text_document(a.in, [&](std::string_view text) {
    auto ids = tokenize_greedy(vocab, text);
    chunker.add_document(ids, [&](TokenSequence&& seq) {
      tokens += seq.ids.size();
      writer.append(seq.ids);
    });
  });
  writer.finish();
  out << fmt::format("documents={} sequences={} tokens={} dropped_tokens={}\n", chunker.documents(),
                     chunker.sequences(), tokens, chunker.dropped_tokens());
  return 0;
}

int do_sample_batches(const SampleArgs& a, const VocabArgs& v, const CommonArgs& common,
                      std::ostream& out, std::ostream& err) {
  SequenceStoreReader reader(a.store);
  auto vocab = load_vocab(a.vocab, v.specials());

  MaskSpec spec;
  spec.rate = a.rate;
  spec.mean_span = a.mean_span;
  spec.mode = a.mode == "iid" ? MaskMode::Iid : MaskMode::Span;
  validate(spec);
  auto plan = plan_accumulation(a.effective_batch, a.micro_batch);

  std::vector<std::size_t> lengths;
  std::vector<std::uint64_t> usable;
  for (std::uint64_t i = 0; i < reader.count(); ++i) {
    if (reader.length(i) < 2) continue;
    usable.push_back(i);
    lengths.push_back(reader.length(i));
  }
  auto batches = group_batches(lengths, plan.micro_batch_size, a.sort_by_length);

  std::ofstream report_file;
  if (!a.report.empty()) report_file = open_output(a.report);
  std::ostream& report = a.report.empty() ? err : report_file;

  std::ofstream text_file;
  std::unique_ptr<SequenceStoreWriter> binary;
  if (a.format == "binary") {
    if (a.out.empty()) throw Error(ErrorCode::Config, "--format binary needs --out");
    binary = std::make_unique<SequenceStoreWriter>(a.out);
  } else if (!a.out.empty()) {
    text_file = open_output(a.out);
  }
  std::ostream& records = text_file.is_open() ? text_file : out;

  report << fmt::format("# plan micro_batch={} accumulation_steps={} effective_batch={} seed={} epoch={} "
                        "mode={} rate={} mean_span={} sequences={} skipped_short={}\n",
                        plan.micro_batch_size, plan.accumulation_steps, plan.effective_batch,
                        common.seed, a.epoch, a.mode, a.rate, a.mean_span, usable.size(),
                        reader.count() - usable.size());

  std::uint64_t real = 0, cells = 0;
  std::vector<MaskedExample> examples;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    examples.clear();
    for (std::size_t pos : batches[b]) {
      const std::uint64_t seq_index = usable[pos];
      auto seq = reader.read(seq_index);
      auto spans = draw_mask(seq.ids.size(), spec, MaskKey{common.seed, a.epoch, seq_index});
      examples.push_back(apply_span_corruption(seq.ids, spans, vocab));
      const auto& ex = examples.back();
      if (binary) {
        binary->append(ex.input_ids);
        binary->append(ex.target_ids);
      } else {
        records << seq_index << '\t' << join_ids(ex.input_ids) << '\t' << join_ids(ex.target_ids) << '\n';
      }
    }
    auto batch = assemble(examples, plan.micro_batch_size, vocab.pad_id());
    auto eff = padding_efficiency(batch);
    for (const auto& ex : examples) real += ex.input_ids.size() + ex.target_ids.size();
    cells += batch.input_mask.size() + batch.target_mask.size();
    report << fmt::format("batch={} rows={} width_in={} width_tgt={} efficiency_in={} efficiency_tgt={} "
                          "efficiency={} ({:.6f})\n",
                          b, batch.rows, batch.width_in, batch.width_tgt, eff.input.str(),
                          eff.target.str(), eff.combined.str(), eff.combined.value());
  }
  if (binary) binary->finish();
  auto overall = Rational::of(real, cells);
  report << fmt::format("# total batches={} optimizer_steps={} efficiency={} ({:.6f})\n", batches.size(),
                        (batches.size() + plan.accumulation_steps - 1) / plan.accumulation_steps,
                        overall.str(), overall.value());
  if (!records) throw Error(ErrorCode::Io, "write failure on batch records");
  return 0;
}

int do_lr_curve(const LrArgs& a, std::ostream& out) {
  if (a.emit != "csv") throw Error(ErrorCode::Config, "unsupported --emit \"" + a.emit + "\"");
  LrSchedule s;
  s.peak = a.peak;
  s.warmup_steps = a.warmup;
  s.warmup = a.warmup_shape == "inverse-sqrt" ? WarmupShape::InverseSqrt : WarmupShape::Linear;
  if (a.total > 0) {
    s.total_steps = a.total;
  } else if (a.epochs > 0 && (a.sequences > 0 || !a.store.empty())) {
    std::uint64_t sequences = a.sequences > 0 ? a.sequences : SequenceStoreReader(a.store).count();
    s.total_steps = total_steps_for(a.epochs, sequences, a.effective_batch);
  } else {
    throw Error(ErrorCode::Config, "lr-curve needs --total, or --epochs with --sequences or --store");
  }
  s.validate();
  if (a.every == 0) throw Error(ErrorCode::Config, "--every must be positive");

  std::ofstream file;
  if (!a.out.empty()) file = open_output(a.out);
  std::ostream& sink = file.is_open() ? file : out;
  sink << "step,lr\n";
  for (std::uint64_t step = 0; step <= s.total_steps; step += a.every) {
    sink << fmt::format("{},{}\n", step, lr_at(s, step));
    if (s.total_steps - step < a.every && step != s.total_steps) {
      sink << fmt::format("{},{}\n", s.total_steps, lr_at(s, s.total_steps));
      break;
    }
  }
  return 0;
}

int do_memplan(const MemArgs& a, const CommonArgs& common, std::ostream& out) {
  using namespace memplan;
  if (a.gpus == 0) throw Error(ErrorCode::Config, "--gpus must be positive");
  HardwareSpec hw;
  hw.gpu_count = a.gpus;
  hw.gpu_memory_bytes = static_cast<std::uint64_t>(std::llround(a.gpu_mem_gb * static_cast<double>(kGB)));
  hw.system_ram_bytes = static_cast<std::uint64_t>(std::llround(a.ram_gb * static_cast<double>(kGB)));
  hw.nvlink_pairs = a.nvlink;
  hw.pcie_generation = a.pcie_gen;

  ModelSpec model{a.params};
  auto report = estimate(model, parse_precision(a.precision), a.offload);
  check_fit(report, hw, hw.gpu_count);
  auto link = interconnect_compare(hw);
  auto plan = recommend(model, hw);

  out << "== memory estimate ==\n" << render_text(report);
  out << "\n== interconnect ==\n";
  if (!link.applicable) {
    out << "not applicable (single GPU)\n";
  } else {
    out << fmt::format("{}: {} GB/s\n", link.pcie_label, link.pcie_gb_per_s);
    if (link.nvlink) {
      out << fmt::format("NVLink: 50-100 GB/s, {:.3f}x to {:.3f}x {}\n", link.advantage_min,
                         link.advantage_max, link.pcie_label);
    }
    out << fmt::format("slower GPU-to-GPU path: {} ({} GB/s)\n", link.slower_path, link.gpu_to_gpu_gb_per_s);
  }
  out << "\n== recommendations (fp32 baseline) ==\n";
  if (plan.required.empty()) out << "required: none\n";
  for (const auto& rec : plan.required) out << "required: " << rec.text << '\n';
  for (const auto& note : plan.notes) out << "note: " << note << '\n';

  out << "\n== key=value ==\n" << render_kv(report);
  out << fmt::format("interconnect_applicable={}\n", link.applicable ? 1 : 0);
  if (link.applicable) {
    out << fmt::format("pcie_gb_per_s={}\n", link.pcie_gb_per_s);
    if (link.nvlink) {
      out << fmt::format("nvlink_gb_per_s_min={}\nnvlink_gb_per_s_max={}\n", link.nvlink_min_gb_per_s,
                         link.nvlink_max_gb_per_s);
    }
  }
  std::string actions;
  for (const auto& rec : plan.required) {
    if (!actions.empty()) actions += ',';
    switch (rec.action) {
      case Action::OffloadOptimizer: actions += "offload"; break;
      case Action::Use16Bit: actions += "16bit"; break;
      case Action::ModelParallel: actions += "model_parallel"; break;
      case Action::AddSystemMemory: actions += "add_ram"; break;
      case Action::AddGpuMemory: actions += "add_gpu_memory"; break;
    }
  }
  out << fmt::format("required_actions={}\nplan_feasible={}\nseed={}\n", actions.empty() ? "none" : actions,
                     plan.feasible ? 1 : 0, common.seed);
  return 0;
}

int do_stats(const StatsArgs& a, const CommonArgs& common, std::ostream& out) {
  SequenceStoreReader reader(a.store);
  auto stats = compute_stats(reader);
  out << fmt::format("sequences={}\ntokens={}\nseed={}\nhistogram (length count):\n", stats.count,
                     stats.total_tokens, common.seed);
  for (const auto& [length, count] : stats.length_histogram) out << length << ' ' << count << '\n';
  return 0;
}

void append_run_log(const std::string& path, const std::string& subcommand, std::uint64_t config_hash,
                    std::uint64_t seed, int exit_code, const std::vector<std::string>& args) {
  if (path.empty()) return;
  nlohmann::json record;
  record["subcommand"] = subcommand;
  record["config_hash"] = fmt::format("{:016x}", config_hash);
  record["seed"] = seed;
  record["version"] = WARMSTART_VERSION;
  record["formats"] = {{"embt", kEmbeddingFormatVersion}, {"seqs", kStoreFormatVersion}};
  record["exit_code"] = exit_code;
  record["args"] = args;
  std::ofstream log(path, std::ios::binary | std::ios::app);
  if (log) log << record.dump() << '\n';
}

void print_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << "error: code=" << code << " message=" << nlohmann::json(message).dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommonArgs common;
  VocabArgs vocab_args;
  TransplantArgs tp;
  CorpusArgs corpus;
  SampleArgs sample;
  LrArgs lr;
  MemArgs mem;
  StatsArgs stats;

  if (const char* env = std::getenv("WARMSTART_RUN_LOG")) common.run_log = env;
  if (auto log = scan_flag(args, "--run-log")) common.run_log = *log;

  std::string subcommand;
  std::uint64_t config_hash = 0;
  int code = 0;
  try {
    if (const char* env = std::getenv("WARMSTART_SEED")) {
      try {
        common.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Config, std::string("WARMSTART_SEED is not an integer: ") + env);
      }
    }

    CLI::App app{"Warm-start toolkit: embedding transplant, corpus chunking, dynamic masking, "
                 "batching, learning-rate schedule and memory planning",
                 "warmstart"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", WARMSTART_VERSION);
    app.add_option("--config", common.config, "key = value configuration file; flags override it");
    app.add_option("--run-log", common.run_log, "Run log that receives one provenance record per run");
    app.add_option("--seed", common.seed, "Seed for masking (default: WARMSTART_SEED or 0)");

    auto* t = app.add_subcommand("transplant", "Build a warm-start embedding matrix for a new vocabulary");
    t->add_option("--src-emb", tp.src_emb, "Source EMBT embedding file")->required()->check(CLI::ExistingFile);
    t->add_option("--src-vocab", tp.src_vocab, "Source vocabulary file")->required()->check(CLI::ExistingFile);
    t->add_option("--tgt-vocab", tp.tgt_vocab, "Target vocabulary file")->required()->check(CLI::ExistingFile);
    t->add_option("--cache", tp.cache, "Translation cache file (read, extended and rewritten)");
    t->add_option("--out", tp.out, "Output EMBT embedding file")->required();
    t->add_option("--report", tp.report, "JSON transplant report");
    t->add_option("--provider", tp.provider, "Translation provider used to fill the cache")
        ->check(CLI::IsMember({"dict", "remote", "identity"}));
    t->add_option("--dict-file", tp.dict_file, "Dictionary file (source<TAB>translation)")->check(CLI::ExistingFile);
    t->add_option("--remote-url", tp.remote_url, "Translation service endpoint, http://host:port/path");
    t->add_option("--source-lang", tp.source_lang, "Source language code sent to the remote service");
    t->add_option("--target-lang", tp.target_lang, "Target language code sent to the remote service");
    t->add_flag("--retry-failed", tp.retry_failed, "Query the provider again for cached failures");
    t->add_option("--rate-limit", tp.rate_limit, "Remote requests per second, e.g. 5/s");
    t->add_option("--timeout-ms", tp.timeout_ms, "Remote request timeout");
    t->add_option("--batch-size", tp.batch_size, "Tokens per remote request");
    t->add_option("--max-retries", tp.max_retries, "Remote retries per batch");
    add_vocab_options(t, vocab_args);

    auto* p = app.add_subcommand("prepare-corpus", "Tokenize and chunk a text corpus into a sequence store");
    p->add_option("--vocab", corpus.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    p->add_option("--in", corpus.in, "Directory of *.txt files, documents separated by blank lines")
        ->required()->check(CLI::ExistingDirectory);
    p->add_option("--out", corpus.out, "Output sequence store")->required();
    p->add_option("--seq-len", corpus.seq_len, "Sequence length");
    p->add_option("--min-tail", corpus.min_tail, "Shortest document tail that is kept");
    p->add_flag("--no-index", corpus.no_index, "Do not write the side index");
    add_vocab_options(p, vocab_args);

    auto* s = app.add_subcommand("sample-batches", "Mask one epoch of a store and assemble padded batches");
    s->add_option("--store", sample.store, "Sequence store")->required()->check(CLI::ExistingFile);
    s->add_option("--vocab", sample.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    s->add_option("--epoch", sample.epoch, "Epoch number");
    s->add_option("--mode", sample.mode, "Masking mode")->check(CLI::IsMember({"span", "iid"}));
    s->add_option("--rate", sample.rate, "Fraction of tokens masked");
    s->add_option("--mean-span", sample.mean_span, "Mean masked span length");
    s->add_option("--micro-batch", sample.micro_batch, "Sequences per forward pass");
    s->add_option("--effective-batch", sample.effective_batch, "Sequences per optimizer step");
    s->add_flag("--sort-by-length", sample.sort_by_length, "Group sequences of similar length");
    s->add_option("--out", sample.out, "Output file (default: stdout for text)");
    s->add_option("--format", sample.format, "text records or a binary store of (input, target) pairs")
        ->check(CLI::IsMember({"text", "binary"}));
    s->add_option("--report", sample.report, "Per-batch efficiency report (default: stderr)");
    add_vocab_options(s, vocab_args);

    auto* l = app.add_subcommand("lr-curve", "Emit the learning-rate schedule");
    l->add_option("--peak", lr.peak, "Peak learning rate");
    l->add_option("--warmup", lr.warmup, "Warmup steps");
    l->add_option("--total", lr.total, "Total optimizer steps");
    l->add_option("--epochs", lr.epochs, "Epochs, to derive --total");
    l->add_option("--sequences", lr.sequences, "Sequences per epoch, to derive --total");
    l->add_option("--store", lr.store, "Sequence store whose count derives --total")->check(CLI::ExistingFile);
    l->add_option("--effective-batch", lr.effective_batch, "Sequences per optimizer step");
    l->add_option("--every", lr.every, "Step stride of the emitted rows");
    l->add_option("--emit", lr.emit, "Output format")->check(CLI::IsMember({"csv"}));
    l->add_option("--warmup-shape", lr.warmup_shape, "Warmup shape")
        ->check(CLI::IsMember({"linear", "inverse-sqrt"}));
    l->add_option("--out", lr.out, "Output file (default: stdout)");

    auto* m = app.add_subcommand("memplan", "Estimate training memory and recommend a configuration");
    m->add_option("--params", mem.params, "Trainable parameters")->required();
    m->add_option("--precision", mem.precision, "Weight precision")->check(CLI::IsMember({"fp32", "fp16", "bf16"}));
    m->add_flag("--offload", mem.offload, "Keep optimizer states in system memory");
    m->add_option("--gpus", mem.gpus, "Number of GPUs");
    m->add_option("--gpu-mem", mem.gpu_mem_gb, "Memory per GPU in GB");
    m->add_option("--ram", mem.ram_gb, "System memory in GB");
    m->add_flag("--nvlink", mem.nvlink, "GPU pairs are joined by NVLink bridges");
    m->add_option("--pcie-gen", mem.pcie_gen, "PCIe generation")->check(CLI::IsMember({3, 4, 5}));

    auto* st = app.add_subcommand("stats", "Summarize a sequence store");
    st->add_option("--store", stats.store, "Sequence store")->required()->check(CLI::ExistingFile);

    if (auto config = scan_flag(args, "--config")) {
      std::ifstream in(*config, std::ios::binary);
      if (!in) throw Error(ErrorCode::Config, "cannot read config file " + *config);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      for (const auto& [key, value] : parse_config(text)) {
        if (key == "config" || key == "run-log") {
          throw Error(ErrorCode::Config, "\"" + key + "\" cannot be set from the config file");
        }
        bool known = false;
        for (CLI::App* scope : {&app, t, p, s, l, m, st}) {
          if (auto* opt = scope->get_option_no_throw("--" + key)) {
            opt->run_callback_for_default()->default_val(value);
            known = true;
          }
        }
        if (!known) throw Error(ErrorCode::Config, "unknown config key \"" + key + "\"");
      }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << WARMSTART_VERSION << '\n';
      return 0;
    } catch (const CLI::ParseError& e) {
      print_error(err, "Usage", e.what());
      err << app.help();
      append_run_log(common.run_log, subcommand, 0, common.seed, 2, args);
      return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    subcommand = chosen->get_name();
    std::string canonical;
    for (CLI::App* scope : {&app, chosen}) {
      for (const CLI::Option* opt : scope->get_options()) {
        const std::string name = opt->get_name();
        if (name == "--help" || name == "--config" || name == "--run-log" || name == "--version") continue;
        std::string value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
        canonical += name + "=" + value + "\n";
      }
    }
    config_hash = fnv1a64(canonical);

    if (subcommand == "transplant") code = do_transplant(tp, vocab_args, common, out);
    else if (subcommand == "prepare-corpus") code = do_prepare_corpus(corpus, vocab_args, out);
    else if (subcommand == "sample-batches") code = do_sample_batches(sample, vocab_args, common, out, err);
    else if (subcommand == "lr-curve") code = do_lr_curve(lr, out);
    else if (subcommand == "memplan") code = do_memplan(mem, common, out);
    else code = do_stats(stats, common, out);
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    code = e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    code = 1;
  }
  append_run_log(common.run_log, subcommand, config_hash, common.seed, code, args);
  return code;
}

}  // namespace warmstart::cli
