// Batch experiment driver: multiset, fpr, sizing and joinbench commands plus
// filter build/probe. Reports are deterministic given (flags, seeds, inputs)
// and are emitted as JSON or CSV for external plotting.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccf/experiments.hpp"
#include "ccf/serialize.hpp"

using nlohmann::ordered_json;
using namespace ccf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitBuildFailure = 2;

// Relative inputs fall back to the directory named by CCF_DATA_DIR.
std::string resolve_input(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("CCF_DATA_DIR")) {
    fs::path alt = fs::path(dir) / path;
    if (fs::exists(alt)) return alt.string();
  }
  return path;
}

void write_report(const std::string& out, const std::string& format,
                  const std::string& command, const ordered_json& params,
                  const ordered_json& results,
                  const std::vector<std::string>& csv_header,
                  const std::vector<std::vector<std::string>>& csv_rows) {
  std::ostringstream buf;
  if (format == "json") {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["command"] = command;
    doc["params"] = params;
    doc["results"] = results;
    buf << doc.dump(2) << '\n';
  } else {
    for (size_t i = 0; i < csv_header.size(); ++i)
      buf << (i ? "," : "") << csv_header[i];
    buf << '\n';
    for (const auto& row : csv_rows) {
      for (size_t i = 0; i < row.size(); ++i) buf << (i ? "," : "") << row[i];
      buf << '\n';
    }
  }
  if (out == "-" || out.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out + " for writing");
    os << buf.str();
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

uint32_t chain_flag_to_config(uint32_t chain_max) {
  return chain_max == 0 ? kUnboundedChain : chain_max;
}

// --------------------------------------------------------------------------
// multiset
// --------------------------------------------------------------------------

int cmd_multiset(const MultisetParams& p, const std::string& dist,
                 const std::string& out, const std::string& format) {
  MultisetParams params = p;
  params.uniform = dist == "uniform";
  auto rows = run_multiset(params);

  ordered_json jp;
  jp["variant"] = variant_name(params.variant);
  jp["buckets"] = params.num_buckets;
  jp["bucket_size"] = params.bucket_size;
  jp["max_dupes"] = params.max_dupes;
  jp["chain_max"] = params.max_chain == kUnboundedChain ? 0 : params.max_chain;
  jp["kappa_bits"] = params.kappa_bits;
  jp["num_attrs"] = params.num_attrs;
  jp["distribution"] = dist;
  jp["mean_dupes"] = params.mean_dupes;
  jp["seeds"] = params.seeds;
  jp["capacity_slack"] = params.capacity_slack;

  ordered_json results = ordered_json::array();
  std::vector<std::vector<std::string>> csv;
  for (const MultisetRow& r : rows) {
    ordered_json j;
    j["variant"] = variant_name(r.variant);
    j["mean_dupes"] = r.mean_dupes;
    j["seed"] = r.seed;
    j["rows_offered"] = r.rows_offered;
    j["items_before_failure"] = r.items_before_failure;
    j["failed"] = r.failed;
    j["load_at_failure"] = r.load_at_failure;
    j["fpr"] = r.fpr;
    j["mean_pair_occupancy"] = r.mean_pair_occupancy;
    j["efficiency"] = r.efficiency;
    j["efficiency_bound"] = r.efficiency_bound;
    results.push_back(j);
    csv.push_back({variant_name(r.variant), fmt(r.mean_dupes),
                   std::to_string(r.seed), std::to_string(r.rows_offered),
                   std::to_string(r.items_before_failure),
                   r.failed ? "1" : "0", fmt(r.load_at_failure), fmt(r.fpr),
                   fmt(r.mean_pair_occupancy), fmt(r.efficiency),
                   fmt(r.efficiency_bound)});
  }
  write_report(out, format, "multiset", jp, results,
               {"variant", "mean_dupes", "seed", "rows_offered",
                "items_before_failure", "failed", "load_at_failure", "fpr",
                "mean_pair_occupancy", "efficiency", "efficiency_bound"},
               csv);
  return kExitOk;
}

// --------------------------------------------------------------------------
// fpr
// --------------------------------------------------------------------------

int cmd_fpr(const FprParams& p, const std::string& out,
            const std::string& format) {
  auto rows = run_fpr(p);

  ordered_json jp;
  jp["variant"] = variant_name(p.variant);
  jp["kappa_bits"] = p.kappa_bits;
  jp["alpha_bits"] = p.alpha_bits;
  jp["num_attrs"] = p.num_attrs;
  jp["bloom_bits"] = p.bloom_bits;
  jp["bloom_hashes"] = p.bloom_hashes;
  jp["max_dupes"] = p.max_dupes;
  jp["chain_max"] = p.max_chain == kUnboundedChain ? 0 : p.max_chain;
  jp["keys"] = p.num_keys;
  jp["uniform_dupes"] = p.uniform_dupes;
  jp["queries"] = p.queries;
  jp["mismatched_clauses"] = p.mismatched_clauses;
  jp["seeds"] = p.seeds;

  ordered_json results = ordered_json::array();
  std::vector<std::vector<std::string>> csv;
  if (p.queries > 0) {
    for (const FprRow& r : rows) {
      ordered_json j;
      j["variant"] = variant_name(r.variant);
      j["kappa_bits"] = r.kappa_bits;
      j["alpha_bits"] = r.alpha_bits;
      j["seed"] = r.seed;
      j["measured_key_fpr"] = r.measured_key;
      j["predicted_key_fpr"] = r.predicted_key;
      j["measured_pred_fpr"] = r.measured_pred;
      j["predicted_pred_fpr"] = r.predicted_pred;
      j["fp_key_cause"] = r.fp_key_cause;
      j["fp_attr_cause"] = r.fp_attr_cause;
      j["mean_pair_occupancy"] = r.mean_pair_occupancy;
      results.push_back(j);
      csv.push_back({variant_name(r.variant), std::to_string(r.kappa_bits),
                     std::to_string(r.alpha_bits), std::to_string(r.seed),
                     fmt(r.measured_key), fmt(r.predicted_key),
                     fmt(r.measured_pred), fmt(r.predicted_pred),
                     std::to_string(r.fp_key_cause),
                     std::to_string(r.fp_attr_cause),
                     fmt(r.mean_pair_occupancy)});
    }
  }
  write_report(out, format, "fpr", jp, results,
               {"variant", "kappa_bits", "alpha_bits", "seed",
                "measured_key_fpr", "predicted_key_fpr", "measured_pred_fpr",
                "predicted_pred_fpr", "fp_key_cause", "fp_attr_cause",
                "mean_pair_occupancy"},
               csv);
  return kExitOk;
}

// --------------------------------------------------------------------------
// sizing
// --------------------------------------------------------------------------

int cmd_sizing(const SizingParams& p, const std::string& out,
               const std::string& format) {
  auto rows = run_sizing(p);

  ordered_json jp;
  jp["variant"] = variant_name(p.variant);
  jp["max_dupes"] = p.max_dupes;
  jp["chain_max"] = p.max_chain == kUnboundedChain ? 0 : p.max_chain;
  jp["target_load"] = p.target_load;
  jp["rows"] = p.rows;
  jp["mean_dupes"] = p.mean_dupes;
  jp["seeds"] = p.seeds;

  ordered_json results = ordered_json::array();
  std::vector<std::vector<std::string>> csv;
  for (const SizingRow& r : rows) {
    ordered_json j;
    j["variant"] = variant_name(r.variant);
    j["mean_dupes"] = r.mean_dupes;
    j["seed"] = r.seed;
    j["predicted_entries"] = r.predicted_entries;
    j["actual_entries"] = r.actual_entries;
    j["suggested_buckets"] = r.suggested_buckets;
    j["suggested_bucket_size"] = r.suggested_bucket_size;
    j["load_factor"] = r.load_factor;
    j["all_inserted"] = r.all_inserted;
    results.push_back(j);
    csv.push_back({variant_name(r.variant), fmt(r.mean_dupes),
                   std::to_string(r.seed), fmt(r.predicted_entries),
                   std::to_string(r.actual_entries),
                   std::to_string(r.suggested_buckets),
                   std::to_string(r.suggested_bucket_size),
                   fmt(r.load_factor), r.all_inserted ? "1" : "0"});
  }
  write_report(out, format, "sizing", jp, results,
               {"variant", "mean_dupes", "seed", "predicted_entries",
                "actual_entries", "suggested_buckets", "suggested_bucket_size",
                "load_factor", "all_inserted"},
               csv);
  return kExitOk;
}

// --------------------------------------------------------------------------
// joinbench
// --------------------------------------------------------------------------

struct LoadedWorkload {
  std::vector<TableData> tables;
  std::vector<QuerySpec> queries;
};

LoadedWorkload load_workload_json(const std::string& path) {
  std::ifstream in(resolve_input(path));
  if (!in) throw std::runtime_error("cannot open workload file " + path);
  ordered_json doc = ordered_json::parse(in);
  LoadedWorkload w;
  std::map<std::string, uint32_t> table_index;
  for (const auto& jt : doc.at("tables")) {
    CsvSchema schema;
    schema.key_column = jt.at("key_column").get<std::string>();
    for (const auto& c : jt.at("columns"))
      schema.attr_columns.push_back(c.get<std::string>());
    TableData t = ingest_csv(resolve_input(jt.at("path").get<std::string>()),
                             schema);
    t.name = jt.at("name").get<std::string>();
    if (jt.contains("binned_columns")) {
      for (auto it = jt.at("binned_columns").begin();
           it != jt.at("binned_columns").end(); ++it) {
        auto col = std::find(schema.attr_columns.begin(),
                             schema.attr_columns.end(), it.key());
        if (col == schema.attr_columns.end())
          throw std::runtime_error("binned column not in schema: " + it.key());
        uint32_t idx = uint32_t(col - schema.attr_columns.begin());
        t.columns[idx].binnable = true;
        t.enable_binning(idx, it.value().get<uint32_t>());
      }
    }
    table_index[t.name] = uint32_t(w.tables.size());
    w.tables.push_back(std::move(t));
  }
  for (const auto& jq : doc.at("queries")) {
    QuerySpec q;
    q.base_table = table_index.at(jq.at("base").get<std::string>());
    for (const auto& j : jq.at("joined"))
      q.joined.push_back(table_index.at(j.get<std::string>()));
    if (jq.contains("predicates")) {
      for (const auto& jp : jq.at("predicates")) {
        uint32_t t = table_index.at(jp.at("table").get<std::string>());
        const TableData& table = w.tables[t];
        PredSpec p;
        std::string col = jp.at("column").get<std::string>();
        bool found = false;
        for (uint32_t j = 0; j < table.columns.size(); ++j)
          if (table.columns[j].name == col) {
            p.column = j;
            found = true;
          }
        if (!found)
          throw std::runtime_error("predicate column not found: " + col);
        if (jp.contains("range")) {
          p.is_range = true;
          p.lo = jp.at("range").at(0).get<uint64_t>();
          p.hi = jp.at("range").at(1).get<uint64_t>();
        } else {
          for (const auto& v : jp.at("values"))
            p.values.push_back(v.get<uint64_t>());
        }
        q.preds[t].push_back(std::move(p));
      }
    }
    w.queries.push_back(std::move(q));
  }
  return w;
}

int cmd_joinbench(const JoinbenchParams& p, bool synthetic,
                  const std::string& workload_path, uint64_t key_domain,
                  uint32_t num_queries, const std::vector<uint64_t>& seeds,
                  const std::string& out, const std::string& format) {
  ordered_json jp;
  jp["variant"] = variant_name(p.variant);
  jp["kappa_bits"] = p.kappa_bits;
  jp["alpha_bits"] = p.alpha_bits;
  jp["bloom_bits"] = p.bloom_bits;
  jp["bloom_hashes"] = p.bloom_hashes;
  jp["max_dupes"] = p.max_dupes;
  jp["chain_max"] = p.max_chain == kUnboundedChain ? 0 : p.max_chain;
  jp["target_load"] = p.target_load;
  jp["perfect_filters"] = p.perfect_filters;
  jp["synthetic"] = synthetic;
  if (synthetic) {
    jp["key_domain"] = key_domain;
    jp["num_queries"] = num_queries;
  } else {
    jp["workload"] = workload_path;
  }
  jp["seeds"] = seeds;

  ordered_json results = ordered_json::array();
  std::vector<std::vector<std::string>> csv;
  for (uint64_t seed : seeds) {
    LoadedWorkload w;
    if (synthetic) {
      StarWorkload sw = make_star_workload(seed, key_domain, num_queries);
      w.tables = std::move(sw.tables);
      w.queries = std::move(sw.queries);
    } else {
      w = load_workload_json(workload_path);
    }
    JoinbenchParams params = p;
    params.seed = seed;
    JoinbenchResult res = run_joinbench(w.tables, w.queries, params);

    ordered_json js;
    js["seed"] = seed;
    js["aggregate_rf_exact"] = res.aggregate_rf_exact;
    js["aggregate_rf_exact_binned"] = res.aggregate_rf_exact_binned;
    js["aggregate_rf_filter"] = res.aggregate_rf_filter;
    js["aggregate_rf_keyonly"] = res.aggregate_rf_keyonly;
    js["total_filter_bits"] = res.total_filter_bits;
    ordered_json jrows = ordered_json::array();
    for (const JoinbenchQueryRow& r : res.rows) {
      ordered_json j;
      j["query"] = r.query;
      j["base_table"] = r.base_table;
      j["num_joined"] = r.num_joined;
      j["m_predicate"] = r.rf.m_predicate;
      j["m_semijoin"] = r.rf.m_semijoin;
      j["m_filtered"] = r.rf.m_filtered;
      j["m_keyonly"] = r.rf.m_keyonly;
      j["rf_exact"] = r.rf.rf_exact;
      j["rf_filter"] = r.rf.rf_filter;
      j["rf_keyonly"] = r.rf.rf_keyonly;
      j["m_semijoin_binned"] = r.m_semijoin_binned;
      j["fpr_vs_oracle"] = r.rf.fpr_vs_oracle;
      j["fpr_vs_binned_oracle"] = r.fpr_vs_binned_oracle;
      j["fpr_bound"] = r.fpr_bound;
      jrows.push_back(j);
      csv.push_back({std::to_string(seed), std::to_string(r.query),
                     r.base_table, std::to_string(r.num_joined),
                     std::to_string(r.rf.m_predicate),
                     std::to_string(r.rf.m_semijoin),
                     std::to_string(r.rf.m_filtered),
                     std::to_string(r.rf.m_keyonly),
                     std::to_string(r.m_semijoin_binned), fmt(r.rf.rf_exact),
                     fmt(r.rf.rf_filter), fmt(r.rf.rf_keyonly),
                     fmt(r.rf.fpr_vs_oracle), fmt(r.fpr_vs_binned_oracle),
                     fmt(r.fpr_bound)});
    }
    js["queries"] = jrows;
    results.push_back(js);
  }
  write_report(out, format, "joinbench", jp, results,
               {"seed", "query", "base_table", "num_joined", "m_predicate",
                "m_semijoin", "m_filtered", "m_keyonly", "m_semijoin_binned",
                "rf_exact", "rf_filter", "rf_keyonly", "fpr_vs_oracle",
                "fpr_vs_binned_oracle", "fpr_bound"},
               csv);
  return kExitOk;
}

// --------------------------------------------------------------------------
// build / probe
// --------------------------------------------------------------------------

int cmd_build(const std::string& input, const std::string& key_column,
              const std::vector<std::string>& attr_columns,
              const std::vector<std::string>& bin_specs, FilterConfig cfg,
              bool auto_size, double target_load, uint32_t rebuild_budget,
              const std::string& out) {
  CsvSchema schema{key_column, attr_columns};
  TableData table = ingest_csv(resolve_input(input), schema);
  ordered_json meta_columns = ordered_json::array();
  for (const std::string& spec : bin_specs) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    uint32_t bins = colon == std::string::npos
                        ? 16
                        : uint32_t(std::stoul(spec.substr(colon + 1)));
    bool found = false;
    for (uint32_t j = 0; j < table.columns.size(); ++j)
      if (table.columns[j].name == name) {
        table.columns[j].binnable = true;
        table.enable_binning(j, bins);
        found = true;
      }
    if (!found) throw std::runtime_error("bin column not in schema: " + name);
  }

  cfg.num_attrs = uint32_t(attr_columns.size());
  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  for (const Row& r : table.rows)
    rows.push_back(Row{r.key, table.filter_attrs(r)});
  if (auto_size) {
    DataProfile profile = DataProfile::from_rows(rows);
    FilterConfig suggested = suggest_config(profile, cfg.variant, target_load,
                                            cfg.max_dupes, cfg.max_chain);
    cfg.num_buckets = suggested.num_buckets;
    cfg.bucket_size = suggested.bucket_size;
  }
  ConditionalCuckooFilter f(cfg);
  for (const Row& r : rows) f.insert(r);
  for (uint32_t attempt = 0; attempt < rebuild_budget && f.stats().failed > 0;
       ++attempt)
    f = rebuild(f, rows, 2.0);
  if (f.stats().failed > 0) {
    std::cerr << "build failed: " << f.stats().failed
              << " rows could not be inserted (rebuild budget exhausted); "
                 "rerun with --rebuild-budget or larger --buckets\n";
    return kExitBuildFailure;
  }
  save_filter(f, out);

  // Sidecar metadata so probes can map raw values through the binning.
  ordered_json meta;
  meta["key_column"] = key_column;
  for (uint32_t j = 0; j < table.columns.size(); ++j) {
    ordered_json jc;
    jc["name"] = table.columns[j].name;
    if (table.columns[j].binning) {
      const BinningMap& b = *table.columns[j].binning;
      jc["binned"] = true;
      ordered_json lower = ordered_json::array();
      for (uint64_t v : b.lower_bounds()) lower.push_back(v);
      jc["lower_bounds"] = lower;
      jc["max_value"] = b.max_value();
    } else {
      jc["binned"] = false;
    }
    meta_columns.push_back(jc);
  }
  meta["columns"] = meta_columns;
  std::ofstream ms(out + ".meta.json");
  ms << meta.dump(2) << '\n';

  std::cerr << "built " << variant_name(cfg.variant) << " filter: "
            << f.occupied_entries() << " entries, load factor "
            << f.load_factor() << ", " << size_bits(cfg) << " bits\n";
  return kExitOk;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int cmd_probe(const std::string& filter_path, const std::string& queries_path,
              const std::string& out) {
  ConditionalCuckooFilter f = load_filter(resolve_input(filter_path));

  // Optional binning sidecar written by the build command.
  std::vector<std::optional<BinningMap>> binnings(f.config().num_attrs);
  {
    std::ifstream ms(resolve_input(filter_path) + ".meta.json");
    if (ms) {
      ordered_json meta = ordered_json::parse(ms);
      uint32_t j = 0;
      for (const auto& jc : meta.at("columns")) {
        if (j >= binnings.size()) break;
        if (jc.at("binned").get<bool>()) {
          std::vector<uint64_t> lower;
          for (const auto& v : jc.at("lower_bounds"))
            lower.push_back(v.get<uint64_t>());
          binnings[j] = BinningMap::from_bounds(
              lower, jc.at("max_value").get<uint64_t>());
        }
        ++j;
      }
    }
  }

  std::ifstream qs(resolve_input(queries_path));
  if (!qs) throw std::runtime_error("cannot open " + queries_path);
  std::string line;
  if (!std::getline(qs, line)) throw std::runtime_error("empty queries file");
  uint64_t lineno = 1;

  std::ostringstream buf;
  buf << "key,result\n";
  uint64_t count = 0;
  auto start = std::chrono::steady_clock::now();
  while (std::getline(qs, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.empty() || fields[0].empty())
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": missing key");
    uint64_t key = std::stoull(fields[0]);
    Predicate pred;
    for (uint32_t j = 0; j + 1 < fields.size() && j < f.config().num_attrs;
         ++j) {
      const std::string& cell = fields[j + 1];
      if (cell.empty()) continue;
      std::vector<uint64_t> values;
      for (const std::string& tok : split(cell, ';')) {
        auto dots = tok.find("..");
        if (dots != std::string::npos) {
          uint64_t lo = std::stoull(tok.substr(0, dots));
          uint64_t hi = std::stoull(tok.substr(dots + 2));
          if (binnings[j]) {
            for (uint64_t b : binnings[j]->bins_for_range(lo, hi))
              values.push_back(b);
          } else if (hi - lo <= 64) {
            for (uint64_t v = lo; v <= hi; ++v) values.push_back(v);
          } else {
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": range too wide for unbinned column");
          }
        } else {
          uint64_t v = std::stoull(tok);
          values.push_back(binnings[j] ? binnings[j]->bin_of(v) : v);
        }
      }
      if (values.empty()) values.push_back(~0ull);  // unsatisfiable clause
      pred.add_in_list(j, std::move(values));
    }
    buf << key << ',' << (f.query_pred(key, pred) ? 1 : 0) << '\n';
    ++count;
  }
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  if (out == "-" || out.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out);
    os << buf.str();
  }
  if (elapsed > 0 && count > 0)
    std::cerr << count << " probes in " << elapsed << "s ("
              << uint64_t(double(count) / elapsed) << "/s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Conditional cuckoo filter experiments: approximate set membership "
      "with equality predicates.\nRelative input paths also resolve against "
      "$CCF_DATA_DIR."};
  app.require_subcommand(1);

  std::string out = "-";
  std::string format = "json";
  app.add_option("--out", out, "Output path ('-' = stdout)")
      ->capture_default_str();
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  std::string variant_s = "chained";
  auto add_variant = [&](CLI::App* cmd) {
    cmd->add_option("--variant", variant_s,
                    "Filter variant: plain|bloom|mixed|chained")
        ->check(CLI::IsMember({"plain", "bloom", "mixed", "chained"}))
        ->capture_default_str();
  };

  // multiset ----------------------------------------------------------------
  MultisetParams mp;
  std::string dist = "zipf";
  uint32_t m_chain = 0;
  auto* multiset = app.add_subcommand(
      "multiset", "Items before first failed insertion and load factor");
  multiset->fallthrough();
  add_variant(multiset);
  multiset->add_option("--buckets", mp.num_buckets, "Buckets m (power of two)")
      ->capture_default_str();
  multiset->add_option("--bucket-size", mp.bucket_size, "Entries per bucket b")
      ->capture_default_str();
  multiset->add_option("--max-dupes", mp.max_dupes, "Duplicate cap d per pair")
      ->capture_default_str();
  multiset->add_option("--chain-max", m_chain, "Chain cap L (0 = unbounded)")
      ->capture_default_str();
  multiset->add_option("--kappa-bits", mp.kappa_bits, "Key fingerprint bits")
      ->capture_default_str();
  multiset->add_option("--num-attrs", mp.num_attrs,
                       "Attribute columns (0 = bare multiset)")
      ->capture_default_str();
  multiset->add_option("--distribution", dist, "Duplicate distribution")
      ->check(CLI::IsMember({"zipf", "uniform"}))
      ->capture_default_str();
  multiset->add_option("--mean-dupes", mp.mean_dupes, "Mean duplicates sweep")
      ->capture_default_str();
  multiset->add_option("--slack", mp.capacity_slack,
                       "Dataset size as a multiple of capacity")
      ->capture_default_str();
  multiset->add_option("--fpr-queries", mp.fpr_queries, "Absent-key probes")
      ->capture_default_str();
  multiset->add_option("--seeds", mp.seeds, "Seeds")->capture_default_str();
  multiset->add_flag_callback(
      "--no-cycle-detection", [&] { mp.cycle_detection = false; },
      "Disable chain cycle detection");

  // fpr ---------------------------------------------------------------------
  FprParams fp;
  uint32_t f_chain = 2;
  auto* fpr = app.add_subcommand("fpr", "Measured versus predicted FPR");
  fpr->fallthrough();
  add_variant(fpr);
  fpr->add_option("--kappa-bits", fp.kappa_bits, "Key fingerprint bits")
      ->capture_default_str();
  fpr->add_option("--alpha-bits", fp.alpha_bits, "Attribute fingerprint bits")
      ->capture_default_str();
  fpr->add_option("--num-attrs", fp.num_attrs, "Attribute columns")
      ->capture_default_str();
  fpr->add_option("--bloom-bits", fp.bloom_bits, "Per-entry Bloom bits")
      ->capture_default_str();
  fpr->add_option("--bloom-hashes", fp.bloom_hashes, "Bloom hash count")
      ->capture_default_str();
  fpr->add_option("--max-dupes", fp.max_dupes, "Duplicate cap d")
      ->capture_default_str();
  fpr->add_option("--chain-max", f_chain, "Chain cap L (0 = unbounded)")
      ->capture_default_str();
  fpr->add_option("--keys", fp.num_keys, "Distinct keys")->capture_default_str();
  fpr->add_option("--uniform-dupes", fp.uniform_dupes,
                  "Distinct attribute vectors per key")
      ->capture_default_str();
  fpr->add_option("--queries", fp.queries, "Probe count")->capture_default_str();
  fpr->add_option("--mismatched-clauses", fp.mismatched_clauses,
                  "Absent-value clauses per predicate probe")
      ->capture_default_str();
  fpr->add_option("--seeds", fp.seeds, "Seeds")->capture_default_str();

  // sizing ------------------------------------------------------------------
  SizingParams sp;
  uint32_t s_chain = 0;
  auto* sizing =
      app.add_subcommand("sizing", "Predicted versus actual entry counts");
  sizing->fallthrough();
  add_variant(sizing);
  sizing->add_option("--max-dupes", sp.max_dupes, "Duplicate cap d")
      ->capture_default_str();
  sizing->add_option("--chain-max", s_chain, "Chain cap L (0 = unbounded)")
      ->capture_default_str();
  sizing->add_option("--target-load", sp.target_load, "Sizing load factor")
      ->capture_default_str();
  sizing->add_option("--rows", sp.rows, "Rows per run")->capture_default_str();
  sizing->add_option("--mean-dupes", sp.mean_dupes, "Mean duplicates sweep")
      ->capture_default_str();
  sizing->add_option("--seeds", sp.seeds, "Seeds")->capture_default_str();

  // joinbench ---------------------------------------------------------------
  JoinbenchParams jp;
  uint32_t j_chain = 0;
  bool synthetic = false;
  std::string workload_path;
  uint64_t key_domain = 15000;
  uint32_t num_queries = 20;
  std::vector<uint64_t> j_seeds{1};
  auto* joinbench = app.add_subcommand(
      "joinbench", "Semijoin reduction factors on a star workload");
  joinbench->fallthrough();
  add_variant(joinbench);
  joinbench->add_flag("--synthetic", synthetic,
                      "Generate the movie-shaped synthetic workload");
  joinbench->add_option("--workload", workload_path,
                        "Workload description JSON (tables + queries)");
  joinbench->add_option("--key-domain", key_domain, "Synthetic key domain")
      ->capture_default_str();
  joinbench->add_option("--num-queries", num_queries, "Synthetic query count")
      ->capture_default_str();
  joinbench->add_option("--kappa-bits", jp.kappa_bits, "Key fingerprint bits")
      ->capture_default_str();
  joinbench->add_option("--alpha-bits", jp.alpha_bits,
                        "Attribute fingerprint bits")
      ->capture_default_str();
  joinbench->add_option("--bloom-bits", jp.bloom_bits, "Per-entry Bloom bits")
      ->capture_default_str();
  joinbench->add_option("--bloom-hashes", jp.bloom_hashes, "Bloom hash count")
      ->capture_default_str();
  joinbench->add_option("--max-dupes", jp.max_dupes, "Duplicate cap d")
      ->capture_default_str();
  joinbench->add_option("--chain-max", j_chain, "Chain cap L (0 = unbounded)")
      ->capture_default_str();
  joinbench->add_option("--target-load", jp.target_load, "Sizing load factor")
      ->capture_default_str();
  joinbench->add_flag("--perfect", jp.perfect_filters,
                      "Probe the exact oracle instead of built filters");
  joinbench->add_option("--seeds", j_seeds, "Seeds")->capture_default_str();

  // build -------------------------------------------------------------------
  std::string b_input, b_key = "key", b_out = "filter.bin";
  std::vector<std::string> b_attrs, b_bins;
  FilterConfig b_cfg;
  uint32_t b_chain = 0, b_buckets = 0, b_bucket_size = 0, b_budget = 0;
  double b_target = 0.7;
  auto* build = app.add_subcommand("build", "Build and persist a filter");
  build->fallthrough();
  add_variant(build);
  build->add_option("--input", b_input, "Rows CSV (header required)")
      ->required();
  build->add_option("--key-column", b_key, "Join key column")
      ->capture_default_str();
  build->add_option("--attr-columns", b_attrs, "Attribute columns")
      ->required();
  build->add_option("--bin", b_bins,
                    "Bin a column: name[:bins] (repeatable, default 16 bins)");
  build->add_option("--kappa-bits", b_cfg.kappa_bits, "Key fingerprint bits")
      ->capture_default_str();
  build->add_option("--alpha-bits", b_cfg.alpha_bits,
                    "Attribute fingerprint bits")
      ->capture_default_str();
  build->add_option("--bloom-bits", b_cfg.bloom_bits, "Per-entry Bloom bits")
      ->capture_default_str();
  build->add_option("--bloom-hashes", b_cfg.bloom_hashes, "Bloom hash count")
      ->capture_default_str();
  build->add_option("--max-dupes", b_cfg.max_dupes, "Duplicate cap d")
      ->capture_default_str();
  build->add_option("--chain-max", b_chain, "Chain cap L (0 = unbounded)")
      ->capture_default_str();
  build->add_option("--max-kicks", b_cfg.max_kicks, "Kick budget")
      ->capture_default_str();
  build->add_option("--buckets", b_buckets,
                    "Buckets m (0 = auto-size from the data)")
      ->capture_default_str();
  build->add_option("--bucket-size", b_bucket_size,
                    "Entries per bucket (0 = auto)")
      ->capture_default_str();
  build->add_option("--target-load", b_target, "Auto-sizing load factor")
      ->capture_default_str();
  build->add_option("--rebuild-budget", b_budget,
                    "Doublings allowed when the build fails")
      ->capture_default_str();
  build->add_option("--seed", b_cfg.seed, "Hash seed")->capture_default_str();
  build->add_option("--out-filter", b_out, "Filter output path")
      ->capture_default_str();

  // probe -------------------------------------------------------------------
  std::string p_filter, p_queries;
  auto* probe = app.add_subcommand(
      "probe", "Stream (key, predicate) queries against a saved filter");
  probe->fallthrough();
  probe->add_option("--filter", p_filter, "Filter file from build")->required();
  probe->add_option("--queries", p_queries,
                    "CSV: key plus one column per attribute; cells hold "
                    "values, ';'-lists or lo..hi ranges; empty = no clause")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    Variant variant = parse_variant(variant_s);
    if (multiset->parsed()) {
      mp.variant = variant;
      mp.max_chain = chain_flag_to_config(m_chain);
      return cmd_multiset(mp, dist, out, format);
    }
    if (fpr->parsed()) {
      fp.variant = variant;
      fp.max_chain = chain_flag_to_config(f_chain);
      return cmd_fpr(fp, out, format);
    }
    if (sizing->parsed()) {
      sp.variant = variant;
      sp.max_chain = chain_flag_to_config(s_chain);
      return cmd_sizing(sp, out, format);
    }
    if (joinbench->parsed()) {
      jp.variant = variant;
      jp.max_chain = chain_flag_to_config(j_chain);
      if (!synthetic && workload_path.empty())
        throw std::runtime_error("joinbench needs --synthetic or --workload");
      return cmd_joinbench(jp, synthetic, workload_path, key_domain,
                           num_queries, j_seeds, out, format);
    }
    if (build->parsed()) {
      b_cfg.variant = variant;
      b_cfg.max_chain = chain_flag_to_config(b_chain);
      bool auto_size = b_buckets == 0;
      if (!auto_size) {
        b_cfg.num_buckets = b_buckets;
        b_cfg.bucket_size = b_bucket_size ? b_bucket_size : 2 * b_cfg.max_dupes;
      }
      return cmd_build(b_input, b_key, b_attrs, b_bins, b_cfg, auto_size,
                       b_target, b_budget, b_out);
    }
    if (probe->parsed()) return cmd_probe(p_filter, p_queries, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}
