#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "ckidx/datagen.hpp"
#include "ckidx/dataset_io.hpp"
#include "ckidx/error.hpp"
#include "ckidx/indextree.hpp"
#include "ckidx/metadata.hpp"
#include "ckidx/rebuild.hpp"
#include "ckidx/stats.hpp"
#include "ckidx/verify.hpp"

namespace ckidx::cli {

namespace {

using nlohmann::json;

struct BuildFlags {
  std::size_t threads = 1;
  double fill = 0.9;
  unsigned pk = 32;

  [[nodiscard]] RebuildOptions options() const {
    RebuildOptions o;
    o.threads = threads;
    o.cfg.fill_factor = fill;
    o.cfg.pk_bits = pk;
    return o;
  }
};

void add_build_flags(CLI::App* cmd, BuildFlags& f) {
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--fill", f.fill, "node fill factor in (0, 1]");
  cmd->add_option("--pk", f.pk, "partial key bits")->check(CLI::Range(0, 32));
}

json report_json(const RebuildReport& r) {
  return {
      {"method", method_name(r.method)},
      {"threads", r.threads},
      {"key_count", r.key_count},
      {"sort_key_bytes", r.sort_key_bytes},
      {"element_bytes", r.element_bytes},
      {"key_bits", r.key_bits},
      {"rid_bits", r.rid_bits},
      {"height", r.height},
      {"extract_seconds", r.extract_seconds},
      {"sort_seconds", r.sort_seconds},
      {"build_seconds", r.build_seconds},
      {"total_seconds", r.total_seconds},
      {"comparisons", r.comparisons},
      {"word_comparisons", r.word_comparisons},
  };
}

std::string report_text(const RebuildReport& r) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-10s %7s %9s %9s %9s %9s %9s %6s\n", "method", "threads",
                "keys", "extract", "sort", "build", "total", "height");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-10s %7zu %9zu %9.3f %9.3f %9.3f %9.3f %6zu\n",
                method_name(r.method), r.threads, r.key_count, r.extract_seconds,
                r.sort_seconds, r.build_seconds, r.total_seconds, r.height);
  out += buf;
  std::snprintf(buf, sizeof buf, "sort key: %zu bytes (%zu key bits, %zu record-ID bits)\n",
                r.sort_key_bytes, r.key_bits, r.rid_bits);
  out += buf;
  return out;
}

json stats_json(const DatasetStats& s) {
  return {
      {"key_count", s.key_count},
      {"min_key_bytes", s.min_key_bytes},
      {"avg_key_bytes", s.avg_key_bytes},
      {"max_key_bytes", s.max_key_bytes},
      {"full_key_bits", s.full_key_bits},
      {"distinction_bits", s.distinction_bits},
      {"rid_variant_bits", s.rid_variant_bits},
      {"compression_ratio", s.compression_ratio},
      {"full_sort_key_bytes", s.full_sort_key_bytes},
      {"compressed_sort_key_bytes", s.compressed_sort_key_bytes},
      {"sort_key_ratio", s.sort_key_ratio},
      {"extraction_bits", s.extraction_bits},
      {"extended_sort_key_bytes", s.extended_sort_key_bytes},
      {"wcc_full", s.wcc_full},
      {"wcc_compressed", s.wcc_compressed},
      {"word_comparison_ratio", s.word_comparison_ratio},
  };
}

json versioned(json body) {
  body["schema_version"] = kJsonSchemaVersion;
  return body;
}

std::vector<std::size_t> parse_thread_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) {
      throw CLI::ValidationError("--threads", "expected a list like 1,2,4");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--threads", "empty thread list");
  return out;
}

// ---- commands --------------------------------------------------------------

int cmd_gen(const ZipfSpec& spec, const std::string& path, std::ostream& out) {
  const KeySet keys = zipf_generate(spec);
  write_dataset_file(keys, path);
  out << "wrote " << keys.size() << " keys of " << spec.n << " bytes to " << path << '\n';
  return kOk;
}

int cmd_stats(const std::string& data, const std::string& meta_path, const BuildFlags& f,
              bool words, bool as_json, std::ostream& out) {
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  DSMetadata meta = meta_path.empty() ? reconstruct(table, nullptr, f.options()).meta
                                      : load_file(meta_path);
  StatsOptions so;
  so.measure_words = words;
  so.pk_bits = f.pk;
  so.threads = f.threads;
  const DatasetStats s = compute_stats(table, meta, so);
  if (as_json) {
    out << versioned(stats_json(s)).dump(2) << '\n';
  } else {
    out << format_stats(s);
  }
  return kOk;
}

int cmd_build(const std::string& data, const std::string& meta_out, const BuildFlags& f,
              bool as_json, std::ostream& out) {
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  const RebuildResult r = reconstruct(table, nullptr, f.options());
  if (!meta_out.empty()) save_file(r.meta, meta_out);
  if (as_json) {
    out << versioned(report_json(r.report)).dump(2) << '\n';
  } else {
    out << report_text(r.report);
  }
  return kOk;
}

int cmd_rebuild(const std::string& data, const std::string& meta_path,
                const std::string& meta_out, const BuildFlags& f, bool as_json,
                std::ostream& out) {
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  const DSMetadata meta = load(read_file_bytes(meta_path), table.schema().max_key_bits());
  const RebuildResult r = reconstruct(table, &meta, f.options());
  if (!meta_out.empty()) save_file(r.meta, meta_out);
  if (as_json) {
    out << versioned(report_json(r.report)).dump(2) << '\n';
  } else {
    out << report_text(r.report);
  }
  return kOk;
}

struct BenchRow {
  std::size_t threads;
  RebuildReport full;
  RebuildReport comp;
  bool identical;
  std::vector<std::string> problems;
};

RebuildResult best_of(const Table& table, const DSMetadata* meta, const RebuildOptions& o,
                      std::size_t repeat) {
  std::optional<RebuildResult> best;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, repeat); ++i) {
    RebuildResult r = reconstruct(table, meta, o);
    if (!best || r.report.total_seconds < best->report.total_seconds) best = std::move(r);
  }
  return std::move(*best);
}

int cmd_bench(const std::string& data, const std::string& thread_list, const BuildFlags& f,
              std::size_t repeat, const std::string& json_path, bool as_json, std::ostream& out) {
  const auto threads = parse_thread_list(thread_list);
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  RebuildOptions base = f.options();
  base.threads = 1;
  const DSMetadata meta = reconstruct(table, nullptr, base).meta;

  std::vector<BenchRow> rows;
  bool ok = true;
  for (std::size_t p : threads) {
    RebuildOptions o = f.options();
    o.threads = p;
    const RebuildResult full = best_of(table, nullptr, o, repeat);
    const RebuildResult comp = best_of(table, &meta, o, repeat);
    BenchRow row{p, full.report, comp.report, full.tree.scan_rids() == comp.tree.scan_rids(), {}};
    for (const IndexTree* t : {&full.tree, &comp.tree}) {
      for (auto& v : t->verify()) row.problems.push_back(std::move(v));
    }
    ok = ok && row.identical && row.problems.empty();
    rows.push_back(std::move(row));
  }

  auto full_total = [](const RebuildReport& r) { return r.total_seconds; };
  const double base_full = full_total(rows.front().full);
  const double base_comp = rows.front().comp.total_seconds;
  const bool has_base = rows.front().threads == 1;

  json j = versioned({{"dataset", data}, {"key_count", table.live_rows()}});
  j["rows"] = json::array();
  for (const BenchRow& r : rows) {
    const double ratio = r.full.total_seconds / std::max(1e-12, r.comp.total_seconds);
    const double improve = 100.0 * (r.full.total_seconds - r.comp.total_seconds) /
                           std::max(1e-12, r.full.total_seconds);
    json row = {{"threads", r.threads},
                {"full", report_json(r.full)},
                {"compressed", report_json(r.comp)},
                {"total_time_ratio", ratio},
                {"improvement_percent", improve},
                {"identical_scan", r.identical},
                {"violations", r.problems}};
    if (has_base) {
      row["speedup_full"] = base_full / std::max(1e-12, r.full.total_seconds);
      row["speedup_compressed"] = base_comp / std::max(1e-12, r.comp.total_seconds);
    } else {
      row["speedup_full"] = nullptr;
      row["speedup_compressed"] = nullptr;
    }
    j["rows"].push_back(row);
  }
  if (!json_path.empty()) {
    const std::string text = j.dump(2) + "\n";
    write_file_bytes(json_path, std::span(reinterpret_cast<const Byte*>(text.data()), text.size()));
  }
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%5s | %8s %8s %8s | %8s %8s %8s %8s | %6s %8s | %6s %6s\n",
                  "cores", "sort", "build", "total", "extract", "sort", "build", "total",
                  "ratio", "improve", "full", "comp");
    out << "      | full key sort              | compressed key sort                 |"
           " total time      | speedup\n"
        << buf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const BenchRow& r = rows[i];
      const json& jr = j["rows"][i];
      // The full method's gather step is reported inside its sort column.
      const double full_sort = r.full.extract_seconds + r.full.sort_seconds;
      std::string sf = "-", sc = "-";
      if (has_base) {
        char a[32];
        std::snprintf(a, sizeof a, "%.1f", jr["speedup_full"].get<double>());
        sf = a;
        std::snprintf(a, sizeof a, "%.1f", jr["speedup_compressed"].get<double>());
        sc = a;
      }
      std::snprintf(buf, sizeof buf,
                    "%5zu | %8.3f %8.3f %8.3f | %8.3f %8.3f %8.3f %8.3f | %6.2f %7.1f%% | %6s %6s\n",
                    r.threads, full_sort, r.full.build_seconds, r.full.total_seconds,
                    r.comp.extract_seconds, r.comp.sort_seconds, r.comp.build_seconds,
                    r.comp.total_seconds, jr["total_time_ratio"].get<double>(),
                    jr["improvement_percent"].get<double>(), sf.c_str(), sc.c_str());
      out << buf;
    }
    for (const BenchRow& r : rows) {
      if (!r.identical) out << "threads " << r.threads << ": trees differ\n";
      for (const auto& v : r.problems) out << "threads " << r.threads << ": " << v << '\n';
    }
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_verify(const std::string& data, const std::string& meta_path, const BuildFlags& f,
               std::size_t samples, std::uint64_t seed, bool as_json, std::ostream& out) {
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  std::vector<CheckResult> results;
  results.push_back(check_dbit_theorems(table, samples, 64, seed));

  const RebuildOptions o = f.options();
  const RebuildResult first = reconstruct(table, nullptr, o);
  CheckResult first_tree = check_tree(first.tree);
  first_tree.name = "full-key build structure";
  results.push_back(first_tree);
  CheckResult height{"closed-form height", true, ""};
  if (first.tree.height() != expected_height(table.live_rows(), o.cfg)) {
    height.passed = false;
    height.detail = "height " + std::to_string(first.tree.height()) + ", expected " +
                    std::to_string(expected_height(table.live_rows(), o.cfg));
  }
  results.push_back(height);

  const DSMetadata meta = meta_path.empty()
                              ? first.meta
                              : load(read_file_bytes(meta_path), table.schema().max_key_bits());
  results.push_back(check_metadata_covers(table, meta));
  results.push_back(check_compressed_order(table, meta));

  const RebuildResult comp = reconstruct(table, &meta, o);
  CheckResult comp_tree = check_tree(comp.tree);
  comp_tree.name = "compressed-key build structure";
  results.push_back(comp_tree);
  CheckResult same{"compressed build equals full build", true, ""};
  if (comp.tree.scan_rids() != first.tree.scan_rids()) {
    same.passed = false;
    same.detail = "leaf sequences differ";
  }
  results.push_back(same);

  bool ok = true;
  json arr = json::array();
  for (const auto& r : results) {
    ok = ok && r.passed;
    arr.push_back({{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    if (!as_json) {
      out << (r.passed ? "PASS " : "FAIL ") << r.name;
      if (!r.detail.empty()) out << ": " << r.detail;
      out << '\n';
    }
  }
  if (as_json) out << versioned({{"passed", ok}, {"checks", arr}}).dump(2) << '\n';
  return ok ? kOk : kCheckFailed;
}

int cmd_meta_inspect(const std::string& path, bool as_json, std::ostream& out) {
  const DSMetadata meta = load_file(path);
  if (as_json) {
    out << versioned({{"key_bits", meta.key_bits()},
                      {"distinction_positions", meta.dbitmap.positions()},
                      {"variant_positions", meta.variant_bitmap.positions()},
                      {"reference_key_bytes", meta.reference_key.bytes},
                      {"rid_variant_mask", meta.rid_variant_mask}})
               .dump(2)
        << '\n';
  } else {
    out << describe(meta);
  }
  return kOk;
}

int cmd_tree_verify(const std::string& data, const std::string& meta_path, const BuildFlags& f,
                    std::ostream& out) {
  const KeySet keys = read_dataset_file(data);
  const Table table = make_table(keys);
  std::optional<DSMetadata> meta;
  if (!meta_path.empty()) meta = load(read_file_bytes(meta_path), table.schema().max_key_bits());
  const RebuildResult r = reconstruct(table, meta ? &*meta : nullptr, f.options());
  const auto problems = r.tree.verify();
  for (const auto& p : problems) out << p << '\n';
  bool ok = problems.empty();
  if (ok && r.tree.scan_rids() != sorted_rows(table)) {
    out << "scan order differs from the full-key order\n";
    ok = false;
  }
  out << (ok ? "tree ok" : "tree has violations") << ": " << r.tree.size() << " entries, height "
      << r.tree.height() << ", " << r.tree.node_count() << " nodes\n";
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed-key index reconstruction toolkit", "ckidx"};
  app.require_subcommand(1);

  ZipfSpec spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a Zipf(s,n,m) dataset");
  gen->add_option("--s", spec.s, "Zipf exponent")->required();
  gen->add_option("--n", spec.n, "key bytes, a multiple of 8")->required();
  gen->add_option("--m", spec.m, "fixed bytes per 8-byte word")->check(CLI::Range(0, 7));
  gen->add_option("--count", spec.count, "number of keys")->required();
  gen->add_option("--seed", spec.seed, "random seed");
  gen->add_option("--out", gen_out, "output file")->required();

  std::string data, meta_path, meta_out, thread_list = "1", json_path;
  bool as_json = false, no_words = false;
  BuildFlags flags;
  std::size_t repeat = 1, samples = 100;
  std::uint64_t seed = 1;

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("--data", data, "dataset file")->required();
  stats->add_option("--meta", meta_path, "metadata file (default: from a fresh build)");
  stats->add_flag("--no-words", no_words, "skip the word-comparison measurement");
  stats->add_flag("--json", as_json, "JSON output");
  add_build_flags(stats, flags);

  auto* build = app.add_subcommand("build", "first build with full keys");
  build->add_option("--data,--table", data, "dataset file")->required();
  build->add_option("--meta-out", meta_out, "write the computed metadata here");
  build->add_flag("--json", as_json, "JSON output");
  add_build_flags(build, flags);

  auto* rebuild = app.add_subcommand("rebuild", "rebuild with compressed keys");
  rebuild->add_option("--table,--data", data, "dataset file")->required();
  rebuild->add_option("--meta", meta_path, "metadata file")->required();
  rebuild->add_option("--meta-out", meta_out, "write the recomputed metadata here");
  rebuild->add_flag("--json", as_json, "JSON output");
  add_build_flags(rebuild, flags);

  auto* bench = app.add_subcommand("bench", "full versus compressed key reconstruction");
  bench->add_option("--data", data, "dataset file")->required();
  bench->add_option("--threads", thread_list, "comma-separated thread counts");
  bench->add_option("--fill", flags.fill, "node fill factor in (0, 1]");
  bench->add_option("--pk", flags.pk, "partial key bits")->check(CLI::Range(0, 32));
  bench->add_option("--repeat", repeat, "runs per configuration, best kept")
      ->check(CLI::Range(1, 1000));
  bench->add_option("--json-out", json_path, "also write the JSON report here");
  bench->add_flag("--json", as_json, "JSON output");

  auto* verify = app.add_subcommand("verify", "run every invariant suite");
  verify->add_option("--data", data, "dataset file")->required();
  verify->add_option("--meta", meta_path, "metadata file to check (default: fresh)");
  verify->add_option("--samples", samples, "random key sets for the distinction-bit theorems");
  verify->add_option("--seed", seed, "sampling seed");
  verify->add_flag("--json", as_json, "JSON output");
  add_build_flags(verify, flags);

  auto* meta = app.add_subcommand("meta", "metadata tools");
  meta->require_subcommand(1);
  auto* inspect = meta->add_subcommand("inspect", "print a metadata file");
  inspect->add_option("--meta,file", meta_path, "metadata file")->required();
  inspect->add_flag("--json", as_json, "JSON output");

  auto* tree = app.add_subcommand("tree", "tree tools");
  tree->require_subcommand(1);
  auto* tverify = tree->add_subcommand("verify", "build a tree and check its invariants");
  tverify->add_option("--data", data, "dataset file")->required();
  tverify->add_option("--meta", meta_path, "build with compressed keys from this metadata");
  add_build_flags(tverify, flags);

  std::vector<std::string> argv_s;
  argv_s.reserve(args.size() + 1);
  argv_s.emplace_back("ckidx");
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      try {
        spec.validate();
      } catch (const Error& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
      }
      return cmd_gen(spec, gen_out, out);
    }
    if (*stats) return cmd_stats(data, meta_path, flags, !no_words, as_json, out);
    if (*build) return cmd_build(data, meta_out, flags, as_json, out);
    if (*rebuild) return cmd_rebuild(data, meta_path, meta_out, flags, as_json, out);
    if (*bench) return cmd_bench(data, thread_list, flags, repeat, json_path, as_json, out);
    if (*verify) return cmd_verify(data, meta_path, flags, samples, seed, as_json, out);
    if (*inspect) return cmd_meta_inspect(meta_path, as_json, out);
    if (*tverify) return cmd_tree_verify(data, meta_path, flags, out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsage;
}

}  // namespace ckidx::cli
