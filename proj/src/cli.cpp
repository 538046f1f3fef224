#include "fairlens/cli.hpp"

#include <CLI11.hpp>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fairlens/audit_frame.hpp"
#include "fairlens/bias_taxonomy.hpp"
#include "fairlens/csv.hpp"
#include "fairlens/data_diagnostics.hpp"
#include "fairlens/error.hpp"
#include "fairlens/fairness_metrics.hpp"
#include "fairlens/mitigation.hpp"
#include "fairlens/reporting.hpp"
#include "fairlens/serialization.hpp"

namespace fairlens::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitGateFailed = 1;
constexpr int kExitUsage = 2;

struct DataArgs {
  std::string data;
  std::string schema;
  std::vector<std::string> protected_attrs;
};

struct Loaded {
  SchemaSpec schema;
  AuditFrame frame;
  GroupPartition partition;
  ValidationReport validation;
};

void add_data_options(CLI::App* sub, DataArgs& a, bool need_protected = true) {
  sub->add_option("--data", a.data, "CSV file")->required();
  sub->add_option("--schema", a.schema, "JSON schema describing the CSV columns")->required();
  auto* p = sub->add_option("--protected", a.protected_attrs, "Protected attribute column(s), comma separated")
                ->delimiter(',');
  if (need_protected) p->required();
}

std::string describe(const ValidationIssue& issue) {
  std::string where = issue.column;
  if (issue.row) where += " row " + std::to_string(*issue.row);
  return where + ": " + issue.message;
}

Loaded load(const DataArgs& a, std::ostream& err) {
  Loaded l;
  l.schema = load_schema(a.schema);
  l.frame = load_csv(a.data, l.schema);
  l.validation = validate(l.frame);
  for (const auto& w : l.validation.warnings) err << "warning: " << describe(w) << '\n';
  if (!l.validation.usable()) {
    throw InputError("invalid data (" + std::to_string(l.validation.errors.size()) +
                     " error(s)); first: " + describe(l.validation.errors.front()));
  }
  if (!a.protected_attrs.empty()) l.partition = partition_by_group(l.frame, a.protected_attrs);
  return l;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// SOURCE_DATE_EPOCH when set, otherwise the newest input modification time,
/// so that reruns over unchanged inputs produce identical bytes.
std::string envelope_timestamp(const std::vector<std::string>& inputs) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    try {
      return format_timestamp(static_cast<double>(std::stoll(epoch)));
    } catch (const std::exception&) {
      throw InputError("SOURCE_DATE_EPOCH is not an integer");
    }
  }
  std::optional<double> newest;
  for (const auto& path : inputs) {
    std::error_code ec;
    const auto t = fs::last_write_time(path, ec);
    if (ec) continue;
    const auto sys = std::chrono::file_clock::to_sys(t);
    const double seconds =
        static_cast<double>(std::chrono::duration_cast<std::chrono::seconds>(sys.time_since_epoch()).count());
    newest = newest ? std::max(*newest, seconds) : seconds;
  }
  return format_timestamp(newest.value_or(0.0));
}

json envelope(const std::vector<std::string>& args, const std::vector<std::string>& inputs) {
  return {{"tool_version", std::string(kToolVersion)}, {"invocation", args}, {"timestamp", envelope_timestamp(inputs)}};
}

/// Writes via a temporary file and rename; "-" or empty writes to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("cannot write " + tmp.string());
    file << text;
    file.close();
    if (!file) throw InputError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot move output into place at " + path);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json merged(json base, const json& extra) {
  for (const auto& [k, v] : extra.items()) base[k] = v;
  return base;
}

std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("FAIRLENS_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string_view(env).size()) throw std::invalid_argument("trailing text");
      return v;
    } catch (const std::exception&) {
      throw InputError("FAIRLENS_SEED is not a non-negative integer");
    }
  }
  return std::nullopt;
}

std::vector<int> read_counterfactual(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open counterfactual predictions " + path);
  const auto records = csv::parse(in);
  if (records.empty()) throw InputError(path + ": empty file");
  std::vector<int> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& field = records[i].at(0);
    if (field != "0" && field != "1") throw InputError(path + ": row " + std::to_string(i) + " is not 0/1");
    out.push_back(field == "1" ? 1 : 0);
  }
  return out;
}

std::string taxonomy_markdown(const std::vector<BiasEntry>& entries) {
  std::ostringstream out;
  out << "| ID | Bias | Category | Lifecycle Stages | Fairness Types |\n| --- | --- | --- | --- | --- |\n";
  for (const auto& e : entries) {
    std::string stages;
    for (int s : e.lifecycle_stages) stages += (stages.empty() ? "" : ", ") + std::to_string(s);
    std::string types;
    for (auto t : e.fairness_types) types += (types.empty() ? "" : "; ") + std::string(to_string(t));
    out << "| " << e.id << " | " << e.name << " | " << to_string(e.category) << " | " << stages << " | " << types
        << " |\n";
  }
  return out.str();
}

DocumentMeta meta_from(const json& j) {
  DocumentMeta meta;
  meta.date_completed = j.value("date_completed", "");
  meta.team_members = j.value("team_members", std::vector<std::string>{});
  return meta;
}

Document build_document(const std::string& kind, const json& in) {
  if (kind == "fps") {
    PositionStatementInput input;
    input.project = in.value("project", "");
    input.meta = meta_from(in);
    for (const auto& m : in.value("established_metrics", json::array())) {
      input.established_metrics.push_back(criterion_from_json(m));
    }
    input.rationale = in.value("rationale", "");
    if (in.contains("measured") && !in.at("measured").is_null()) {
      input.measured = fairness_report_from_json(in.at("measured"));
    }
    return position_statement(input);
  }
  if (kind == "plan") {
    BiasPlanInput input;
    input.project = in.value("project", "");
    input.meta = meta_from(in);
    if (in.contains("rows")) {
      for (const auto& r : in.at("rows")) input.rows.push_back(assessment_row_from_json(r));
    } else if (in.contains("stages")) {
      std::vector<int> stages;
      for (const auto& s : in.at("stages")) stages.push_back(s.is_number_integer() ? s.get<int>() : parse_stage(s.get<std::string>()));
      input.rows = scaffold_assessment(stages);
    } else {
      throw InputError("bias plan input needs 'rows' or 'stages'");
    }
    return bias_plan(input);
  }
  FactsheetInput input;
  input.dataset = in.value("dataset", "");
  input.meta = meta_from(in);
  if (in.contains("provenance")) {
    const auto& p = in.at("provenance");
    if (p.is_object()) {
      for (const auto& [k, v] : p.items()) input.provenance.push_back({k, v.is_string() ? v.get<std::string>() : v.dump(), false});
    } else {
      for (const auto& item : p) {
        input.provenance.push_back(
            {item.at("key").get<std::string>(), item.at("value").get<std::string>(), item.value("internal", false)});
      }
    }
  }
  input.qualitative = in.value("qualitative", std::map<std::string, std::string>{});
  if (in.contains("diagnostics")) {
    const auto& d = in.at("diagnostics");
    const json& list = d.is_object() ? d.at("results") : d;
    for (const auto& r : list) input.diagnostics.push_back(diagnostic_result_from_json(r));
  }
  return data_factsheet(input);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness auditing and bias mitigation for tabular prediction data", "fairlens"};
  const std::string version(kToolVersion);
  app.set_version_flag("--version", version);
  app.require_subcommand(1);

  // audit
  DataArgs audit_data;
  std::vector<std::string> metrics;
  std::optional<double> threshold;
  std::string undefined_policy = "strict";
  std::string reference_group;
  std::size_t min_group_size = 10;
  double base_rate_tolerance = kDefaultEpsilon;
  std::size_t consistency_k = 5;
  std::string counterfactual;
  std::string audit_out;
  auto* audit = app.add_subcommand("audit", "Evaluate fairness criteria; exit 1 if any fails");
  add_data_options(audit, audit_data);
  audit->add_option("--metric", metrics, "Criterion metric[:epsilon], repeatable")->required();
  audit->add_option("--threshold", threshold, "Derive predictions as score >= t")->check(CLI::Range(0.0, 1.0));
  audit->add_option("--undefined", undefined_policy, "strict or lenient handling of undefined rates")
      ->check(CLI::IsMember({"strict", "lenient"}));
  audit->add_option("--reference-group", reference_group, "Compare every group against this one");
  audit->add_option("--min-group-size", min_group_size, "Groups smaller than this are marked low confidence");
  audit->add_option("--base-rate-tolerance", base_rate_tolerance, "Tolerance for equal base rates")
      ->check(CLI::Range(0.0, 1.0));
  audit->add_option("--consistency-k", consistency_k, "Neighbours for the consistency score");
  audit->add_option("--counterfactual", counterfactual, "CSV of predictions after altering protected attributes");
  audit->add_option("--out", audit_out, "Report path (default stdout)");

  // diagnose
  DataArgs diag_data;
  std::string reference_path;
  std::string policy_path;
  std::string diag_out;
  auto* diagnose = app.add_subcommand("diagnose", "Run data diagnostics; exit 1 if any check fails");
  add_data_options(diagnose, diag_data);
  diagnose->add_option("--reference", reference_path, "JSON of reference group shares");
  diagnose->add_option("--policy", policy_path, "JSON of diagnostic policy overrides");
  diagnose->add_option("--out", diag_out, "Report path (default stdout)");

  // mitigate
  auto* mitigate = app.add_subcommand("mitigate", "Apply a bias mitigation technique");
  mitigate->require_subcommand(1);
  DataArgs mit_data;
  std::string mit_out;
  std::string mit_csv;
  double mit_epsilon = kDefaultEpsilon;
  std::optional<std::uint64_t> seed;
  std::string strategy = "oversample";
  std::string advantaged;
  std::string disadvantaged;
  std::vector<std::string> constraints;
  double grid_step = 0.05;
  std::string post_metric;
  double theta = 0.0;
  auto common = [&](CLI::App* sub) {
    add_data_options(sub, mit_data);
    sub->add_option("--out", mit_out, "Provenance and result JSON (default stdout)");
    sub->add_option("--csv", mit_csv, "Write the transformed data (or weights) as CSV");
    sub->set_version_flag("--version", version);
  };
  auto* reweigh_cmd = mitigate->add_subcommand("reweigh", "Instance weights making group and label independent");
  common(reweigh_cmd);
  reweigh_cmd->add_option("--epsilon", mit_epsilon, "Tolerance for the label-parity check")->check(CLI::Range(0.0, 1.0));
  auto* resample_cmd = mitigate->add_subcommand("resample", "Resample (group, label) cells toward independence");
  common(resample_cmd);
  resample_cmd->add_option("--strategy", strategy, "oversample or undersample")
      ->check(CLI::IsMember({"oversample", "undersample"}));
  resample_cmd->add_option("--seed", seed, "RNG seed (falls back to FAIRLENS_SEED)");
  resample_cmd->add_option("--epsilon", mit_epsilon, "Tolerance for the label-parity check")->check(CLI::Range(0.0, 1.0));
  auto* relabel_cmd = mitigate->add_subcommand("relabel", "Massage labels between two groups using the score ranking");
  common(relabel_cmd);
  relabel_cmd->add_option("--advantaged", advantaged, "Group label of the advantaged group")->required();
  relabel_cmd->add_option("--disadvantaged", disadvantaged, "Group label of the disadvantaged group")->required();
  relabel_cmd->add_option("--epsilon", mit_epsilon, "Tolerance for the label-parity check")->check(CLI::Range(0.0, 1.0));
  auto* thresholds_cmd = mitigate->add_subcommand("thresholds", "Fit per-group score thresholds");
  common(thresholds_cmd);
  thresholds_cmd->add_option("--constraint", constraints, "metric[:epsilon], repeatable");
  thresholds_cmd->add_option("--grid-step", grid_step, "Threshold grid spacing in (0, 0.5]");
  thresholds_cmd->add_option("--metric", post_metric, "Criterion for the before/after record");
  auto* reject_cmd = mitigate->add_subcommand("reject-option", "Override predictions near the decision boundary");
  common(reject_cmd);
  reject_cmd->add_option("--theta", theta, "Half-width of the band around 0.5")->required();
  reject_cmd->add_option("--disadvantaged", disadvantaged, "Group label of the disadvantaged group")->required();
  reject_cmd->add_option("--metric", post_metric, "Criterion for the before/after record");

  // taxonomy
  auto* taxonomy = app.add_subcommand("taxonomy", "Query the bias taxonomy");
  taxonomy->require_subcommand(1);
  std::vector<std::string> tax_stages;
  std::vector<std::string> tax_categories;
  std::vector<std::string> tax_types;
  std::string tax_format;
  std::string tax_out;
  auto tax_common = [&](CLI::App* sub) {
    sub->add_option("--stage", tax_stages, "Lifecycle stage index or name, repeatable");
    sub->add_option("--category", tax_categories, "Bias category, repeatable");
    sub->add_option("--fairness-type", tax_types, "Fairness type, repeatable");
    sub->add_option("--format", tax_format, "md or json")->check(CLI::IsMember({"md", "markdown", "json"}));
    sub->add_option("--out", tax_out, "Output path (default stdout)");
    sub->set_version_flag("--version", version);
  };
  auto* tax_list = taxonomy->add_subcommand("list", "Markdown table of matching biases");
  tax_common(tax_list);
  auto* tax_export = taxonomy->add_subcommand("export", "JSON array of matching biases");
  tax_common(tax_export);

  // report
  auto* report = app.add_subcommand("report", "Build a governance document");
  report->require_subcommand(1);
  std::string report_input;
  std::string report_format = "md";
  std::string report_out;
  bool report_public = false;
  std::string report_kind;
  for (const char* kind : {"fps", "plan", "factsheet"}) {
    auto* sub = report->add_subcommand(kind, std::string("Render the ") + kind + " document");
    sub->add_option("--input", report_input, "Input JSON")->required();
    sub->add_option("--format", report_format, "md or json")->check(CLI::IsMember({"md", "markdown", "json"}));
    sub->add_option("--out", report_out, "Output path (default stdout)");
    sub->add_flag("--public", report_public, "Leave out fields marked internal");
    sub->set_version_flag("--version", version);
    sub->callback([&report_kind, kind] { report_kind = kind; });
  }
  for (auto* sub : {audit, diagnose, mitigate, taxonomy, report}) sub->set_version_flag("--version", version);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (audit->parsed()) {
      Loaded l = load(audit_data, err);
      std::vector<Criterion> criteria;
      for (const auto& m : metrics) criteria.push_back(parse_criterion(m));
      EvaluationOptions opts;
      opts.threshold = threshold;
      opts.metric.undefined_policy = undefined_policy == "lenient" ? UndefinedPolicy::lenient : UndefinedPolicy::strict;
      if (!reference_group.empty()) opts.metric.reference_group = GroupKey::parse(reference_group);
      opts.metric.min_group_size = min_group_size;
      opts.base_rate_tolerance = base_rate_tolerance;
      opts.consistency_k = consistency_k;
      std::vector<std::string> inputs{audit_data.data, audit_data.schema};
      if (!counterfactual.empty()) {
        opts.counterfactual_predictions = read_counterfactual(counterfactual);
        inputs.push_back(counterfactual);
      }
      const json env = envelope(args, inputs);
      FairnessReport result = evaluate_criteria(l.frame, l.partition, criteria, opts);
      result.timestamp = env.at("timestamp").get<std::string>();
      json body = merged(env, to_json(result));
      body["validation"] = to_json(l.validation);
      emit(audit_out, dump(body), out);
      for (const auto& r : result.results) {
        err << to_string(r.metric) << ": gap " << format_number(r.gap) << " (epsilon " << format_number(r.epsilon)
            << ") " << (r.passed ? "pass" : "FAIL") << '\n';
      }
      return result.overall_passed() ? kExitOk : kExitGateFailed;
    }

    if (diagnose->parsed()) {
      Loaded l = load(diag_data, err);
      std::vector<std::string> inputs{diag_data.data, diag_data.schema};
      DiagnosticPolicy policy;
      if (!policy_path.empty()) {
        policy = diagnostic_policy_from_json(read_json_file(policy_path));
        inputs.push_back(policy_path);
      }
      std::optional<GroupShares> reference;
      if (!reference_path.empty()) {
        reference = group_shares_from_json(read_json_file(reference_path));
        inputs.push_back(reference_path);
      }
      std::vector<DiagnosticResult> results;
      results.push_back(representativeness(l.frame, l.partition, reference, policy));
      results.push_back(sufficiency(l.frame, l.partition, policy));
      results.push_back(missingness_audit(l.frame, l.partition, policy));
      if (l.frame.find_role(Role::timestamp)) results.push_back(timeliness(l.frame, policy));
      if (l.frame.find_role(Role::period) && l.frame.find_role(Role::label)) {
        results.push_back(chronological_consistency(l.frame, policy));
      }
      bool passed = true;
      json list = json::array();
      for (const auto& r : results) {
        passed = passed && r.passed;
        list.push_back(to_json(r));
        err << r.check << ": " << (r.passed ? "pass" : "FAIL") << " (" << r.flags.size() << " flag(s))\n";
      }
      json body = envelope(args, inputs);
      body["results"] = list;
      body["passed"] = passed;
      body["validation"] = to_json(l.validation);
      emit(diag_out, dump(body), out);
      return passed ? kExitOk : kExitGateFailed;
    }

    if (mitigate->parsed()) {
      Loaded l = load(mit_data, err);
      json body = envelope(args, {mit_data.data, mit_data.schema});
      MitigationProvenance provenance;
      json result = json::object();
      std::optional<AuditFrame> transformed;
      std::string weights_csv;

      const Criterion post_criterion = post_metric.empty()
                                           ? (constraints.empty() ? Criterion{} : parse_criterion(constraints.front()))
                                           : parse_criterion(post_metric);
      if (reweigh_cmd->parsed()) {
        const RowWeights w = reweigh(l.frame, l.partition);
        provenance = reweigh_provenance(l.frame, l.partition, w, mit_epsilon);
        json cells = json::array();
        for (const auto& [cell, weight] : w.cell_weights) {
          cells.push_back({{"group", cell.group.label()}, {"label", cell.label}, {"weight", weight}});
        }
        result = {{"cell_weights", cells}, {"weighted_rows", w.rows.size()}};
        std::ostringstream csv_out;
        const std::vector<std::string> header{"row_index", "group", "label", "weight"};
        csv::write_record(csv_out, header);
        const Column& label = *l.frame.find_role(Role::label);
        for (std::size_t i = 0; i < w.rows.size(); ++i) {
          const std::size_t r = w.rows[i];
          const std::vector<std::string> rec{std::to_string(r), l.partition.group_key_of_row[r].label(),
                                             format_number(*label.number(r)), format_number(w.row_weights[i])};
          csv::write_record(csv_out, rec);
        }
        weights_csv = csv_out.str();
      } else if (resample_cmd->parsed()) {
        const auto s = resolve_seed(seed);
        if (!s) throw InputError("resampling needs --seed or FAIRLENS_SEED");
        auto outcome = resample(l.frame, l.partition,
                                strategy == "undersample" ? ResampleStrategy::undersample : ResampleStrategy::oversample,
                                *s, mit_epsilon);
        provenance = outcome.provenance;
        result = {{"rows", outcome.frame.row_count()}};
        transformed = std::move(outcome.frame);
      } else if (relabel_cmd->parsed()) {
        auto outcome = relabel_massage(l.frame, l.partition, GroupKey::parse(advantaged),
                                       GroupKey::parse(disadvantaged), mit_epsilon);
        provenance = outcome.provenance;
        result = {{"rows", outcome.frame.row_count()}, {"flipped", provenance.parameters.at("m")}};
        transformed = std::move(outcome.frame);
      } else if (thresholds_cmd->parsed()) {
        ThresholdSearchOptions opts;
        for (const auto& c : constraints) opts.constraints.push_back(parse_criterion(c));
        opts.grid_step = grid_step;
        const ThresholdPolicy policy = fit_group_thresholds(l.frame, l.partition, opts);
        if (!policy.feasible) err << "warning: no grid point satisfies every constraint; reporting the least violation\n";
        auto outcome = apply_thresholds(l.frame, l.partition, policy, post_criterion);
        provenance = outcome.provenance;
        result = to_json(policy);
        transformed = std::move(outcome.frame);
      } else {
        auto outcome = reject_option_adjust(l.frame, l.partition, theta, GroupKey::parse(disadvantaged), post_criterion);
        provenance = outcome.provenance;
        result = {{"overridden_rows", outcome.overridden}};
        transformed = std::move(outcome.frame);
      }
      body["provenance"] = to_json(provenance);
      body["result"] = result;
      if (!mit_csv.empty()) {
        if (transformed) {
          std::ostringstream csv_out;
          write_csv(csv_out, *transformed, l.schema.missing_token);
          emit(mit_csv, csv_out.str(), out);
        } else {
          emit(mit_csv, weights_csv, out);
        }
      }
      emit(mit_out, dump(body), out);
      return kExitOk;
    }

    if (taxonomy->parsed()) {
      BiasQuery q;
      for (const auto& s : tax_stages) q.stages.insert(parse_stage(s));
      for (const auto& c : tax_categories) q.categories.insert(parse_category(c));
      for (const auto& t : tax_types) q.fairness_types.insert(parse_fairness_type(t));
      const auto entries = query(q);
      const bool as_json = tax_format.empty() ? tax_export->parsed() : tax_format == "json";
      if (as_json) {
        json list = json::array();
        for (const auto& e : entries) list.push_back(to_json(e));
        emit(tax_out, dump(list), out);
      } else {
        emit(tax_out, taxonomy_markdown(entries), out);
      }
      return kExitOk;
    }

    if (report->parsed()) {
      const Document doc = build_document(report_kind, read_json_file(report_input));
      emit(report_out, render(doc, parse_render_format(report_format), report_public), out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fairlens::cli
