// Copyright 2026 The psyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "psyn/pipeline/run.h"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "psyn/common/files.h"
#include "psyn/common/random.h"
#include "psyn/common/status_macros.h"
#include "psyn/eval/fidelity.h"
#include "psyn/eval/privacy.h"
#include "psyn/eval/utility.h"
#include "psyn/pipeline/benchmark.h"
#include "psyn/pipeline/checkpoint.h"
#include "psyn/tabular/csv.h"
#include "psyn/tabular/split.h"
#include "psyn/text/generation.h"

namespace psyn {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

class OutputLock {
 public:
  static absl::StatusOr<std::unique_ptr<OutputLock>> Acquire(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      return absl::PermissionDeniedError(
          absl::StrCat("cannot create output directory ", dir.string(), ": ", ec.message()));
    }
    const fs::path path = dir / artifacts::kLock;
    const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      return absl::FailedPreconditionError(absl::StrCat(
          "output directory ", dir.string(), " is locked by another run (remove ",
          path.string(), " if no run is active)"));
    }
    const std::string pid = absl::StrCat(::getpid(), "\n");
    [[maybe_unused]] const ssize_t written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
    return std::unique_ptr<OutputLock>(new OutputLock(path));
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  explicit OutputLock(fs::path path) : path_(std::move(path)) {}
  fs::path path_;
};

// Files written by one stage, for digests on success and removal on failure.
class StageOutputs {
 public:
  explicit StageOutputs(fs::path root) : root_(std::move(root)) {}

  std::string Path(std::string_view rel) const { return (root_ / rel).string(); }

  absl::Status Write(std::string_view rel, std::string_view contents) {
    written_.emplace_back(rel);
    PSYN_RETURN_IF_ERROR(WriteFile(Path(rel), contents));
    digests_[std::string(rel)] = Sha256Hex(contents);
    return absl::OkStatus();
  }
  absl::Status WriteJson(std::string_view rel, const Json& json) {
    return Write(rel, json.dump(2) + "\n");
  }
  absl::Status WriteCsv(std::string_view rel, const CsvTable& table) {
    return Write(rel, FormatCsv(table));
  }

  void Rollback() {
    for (const std::string& rel : written_) {
      std::error_code ec;
      fs::remove(root_ / rel, ec);
    }
  }
  const std::map<std::string, std::string>& digests() const { return digests_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
  std::map<std::string, std::string> digests_;
};

struct StageContext {
  const PipelineConfig& config;
  StageOutputs& out;
  Json summary = Json::object();  // recorded under manifest.stages[stage]
};

absl::Status MissingArtifact(absl::string_view what, const std::string& path) {
  return absl::NotFoundError(absl::StrCat("missing artifact: ", what, " (", path, ")"));
}

absl::StatusOr<Json> ReadJsonFile(const std::string& path) {
  PSYN_ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  Json json = Json::parse(text, nullptr, false);
  if (json.is_discarded()) return absl::DataLossError(absl::StrCat(path, " is not valid JSON"));
  return json;
}

absl::StatusOr<Schema> LoadRunSchema(const StageContext& ctx) {
  const std::string path = ctx.out.Path(artifacts::kSchema);
  if (!fs::exists(path)) return MissingArtifact("schema", path);
  return LoadSchemaFile(path);
}

absl::StatusOr<Dataset> LoadSplit(const StageContext& ctx, const Schema& schema,
                                  const char* rel, absl::string_view what) {
  const std::string path = ctx.out.Path(rel);
  if (!fs::exists(path)) return MissingArtifact(what, path);
  return LoadDataset(path, schema);
}

absl::StatusOr<Dataset> LoadSynthetic(const StageContext& ctx, const Schema& schema) {
  const std::string path = ctx.out.Path(artifacts::kSynthetic);
  if (!fs::exists(path)) return MissingArtifact("synthetic dataset", path);
  PSYN_ASSIGN_OR_RETURN(const Dataset synth, LoadDataset(path, schema));
  return synth.WithProvenance(Provenance::kSynthetic);
}

absl::Status BenchData(StageContext& ctx) {
  const BenchmarkSection& b = ctx.config.benchmark;
  const uint64_t seed = DeriveSeed(ctx.config.seed, "bench-data");
  PSYN_ASSIGN_OR_RETURN(const Dataset data,
                        GenerateBenchmark(b.preset, b.rows, b.class_shares, seed));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kSchema, data.schema().ToJson()));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kRealData, DatasetToTable(data)));
  ctx.summary = {{"preset", b.preset},
                 {"rows", data.size()},
                 {"columns", data.schema().num_columns()},
                 {"class_counts", data.ClassCounts()}};
  return absl::OkStatus();
}

absl::Status Train(StageContext& ctx) {
  const PipelineConfig& config = ctx.config;
  // Real data: configured path, else the bench-data output.
  const std::string real_path =
      config.data.path.empty() ? ctx.out.Path(artifacts::kRealData) : config.data.path;
  if (!fs::exists(real_path)) return MissingArtifact("real dataset", real_path);
  auto resolve_schema = [&]() -> absl::StatusOr<Schema> {
    if (!config.data.schema_path.empty()) return LoadSchemaFile(config.data.schema_path);
    if (config.data.path.empty() && fs::exists(ctx.out.Path(artifacts::kSchema))) {
      return LoadSchemaFile(ctx.out.Path(artifacts::kSchema));
    }
    return InferSchema(real_path, config.data.label_column);
  };
  PSYN_ASSIGN_OR_RETURN(const Schema schema, resolve_schema());
  PSYN_ASSIGN_OR_RETURN(const Dataset real, LoadDataset(real_path, schema));
  PSYN_ASSIGN_OR_RETURN(const SplitResult split,
                        SplitDataset(real, 1.0 - config.data.test_fraction,
                                     DeriveSeed(config.seed, "split")));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kSchema, schema.ToJson()));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kTrainData, DatasetToTable(split.train)));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kTestData, DatasetToTable(split.test)));

  PSYN_ASSIGN_OR_RETURN(const auto fitted, FitEncode(split.train));
  const Json hyper = config.model.kind == ModelKind::kVae ? config.model.vae.ToJson()
                                                          : config.model.ddpm.ToJson();
  PSYN_ASSIGN_OR_RETURN(std::unique_ptr<GeneratorModel> model,
                        CreateGenerator(config.model.kind, hyper, fitted.first,
                                        DeriveSeed(config.seed, "model-init")));
  const TrainConfig train_config = config.train.ToTrainConfig(DeriveSeed(config.seed, "train"));
  PSYN_ASSIGN_OR_RETURN(const TrainReport report,
                        TrainLoop(*model, fitted.second, train_config));
  if (report.abort_reason == "budget" && report.steps == 0) {
    return absl::ResourceExhaustedError(
        "privacy budget exhausted: not even one training step fits within epsilon_budget");
  }
  if (!report.abort_reason.empty() && report.abort_reason != "budget") {
    return absl::InternalError(absl::StrCat("training failed: ", report.abort_reason));
  }
  PSYN_ASSIGN_OR_RETURN(const std::string checkpoint,
                        SerializeCheckpoint(*model, schema, report.accountant));
  PSYN_RETURN_IF_ERROR(ctx.out.Write(artifacts::kCheckpoint, checkpoint));
  Json report_json = report.ToJson();
  report_json["train_config"] = train_config.ToJson();
  report_json["model_id"] = model->ModelId();
  PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kTrainReport, report_json));

  Json dp = {{"dp_enabled", report.dp_enabled},
             {"sampling_rate", report.sampling_rate},
             {"noise_multiplier", report.noise_multiplier},
             {"clip_norm", report_json["clip_norm"]},
             {"delta", train_config.dp.delta},
             {"steps", report.steps},
             {"epsilon", report.spent.epsilon},
             {"best_alpha", report.spent.alpha},
             {"abort_reason", report.abort_reason}};
  if (report.dp_enabled) {
    Json table = Json::object();
    for (size_t i = 0; i < report.accountant.alphas().size(); ++i) {
      table[std::to_string(report.accountant.alphas()[i])] = report.accountant.rdp()[i];
    }
    dp["rdp"] = table;
  }
  ctx.summary = {{"model", std::string(ModelKindName(model->kind()))},
                 {"model_id", model->ModelId()},
                 {"train_rows", split.train.size()},
                 {"test_rows", split.test.size()},
                 {"dp_budget", dp}};
  return absl::OkStatus();
}

absl::Status Generate(StageContext& ctx) {
  const PipelineConfig& config = ctx.config;
  const std::string checkpoint_path = ctx.out.Path(artifacts::kCheckpoint);
  if (!fs::exists(checkpoint_path)) return MissingArtifact("checkpoint", checkpoint_path);
  PSYN_ASSIGN_OR_RETURN(const Schema schema, LoadRunSchema(ctx));
  PSYN_ASSIGN_OR_RETURN(const Checkpoint checkpoint, LoadCheckpoint(checkpoint_path));
  PSYN_ASSIGN_OR_RETURN(const Dataset train,
                        LoadSplit(ctx, schema, artifacts::kTrainData, "training split"));
  std::optional<std::vector<double>> weights;
  if (config.synthesis.mode == BalanceMode::kCustom) weights = config.synthesis.custom_weights;
  PSYN_ASSIGN_OR_RETURN(const BalancePlan plan,
                        MakeBalancePlan(train.ClassCounts(), config.synthesis.total,
                                        config.synthesis.mode, weights));
  const uint64_t seed = DeriveSeed(config.seed, "generate");
  PSYN_ASSIGN_OR_RETURN(const SynthesisResult result,
                        GenerateRecords(*checkpoint.model, plan, checkpoint.model->layout(),
                                        schema, seed));
  for (const std::string& warning : result.manifest.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kSynthetic, DatasetToTable(result.dataset)));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kGeneration, result.manifest.ToJson()));
  ctx.summary = {{"rows", result.dataset.size()},
                 {"plan", plan.ToJson()},
                 {"warnings", result.manifest.warnings}};
  return absl::OkStatus();
}

absl::Status TextGen(StageContext& ctx) {
  const PipelineConfig& config = ctx.config;
  PSYN_ASSIGN_OR_RETURN(const Schema schema, LoadRunSchema(ctx));
  PSYN_ASSIGN_OR_RETURN(const Dataset synth, LoadSynthetic(ctx, schema));
  TextGenOptions options;
  options.include_label = config.text.include_label;
  options.seed = DeriveSeed(config.seed, "textgen");
  if (config.text.template_path.empty()) {
    options.prompt_template = DefaultTemplate(schema, config.text.include_label);
  } else {
    PSYN_ASSIGN_OR_RETURN(const Json json, ReadJsonFile(config.text.template_path));
    PSYN_ASSIGN_OR_RETURN(options.prompt_template, PromptTemplate::FromJson(json));
  }
  std::unique_ptr<CompletionTransport> transport;
  if (!config.text.client.endpoint.empty()) transport = MakeHttpTransport(config.text.client);
  PSYN_ASSIGN_OR_RETURN(std::vector<ClinicalNote> notes,
                        GenerateNotes(synth, config.text.client, transport.get(), options));
  const int64_t review_k = std::min<int64_t>(config.text.review_k, synth.size());
  PSYN_ASSIGN_OR_RETURN(const PairResult paired,
                        PairAndExport(synth, std::move(notes), review_k,
                                      DeriveSeed(config.seed, "review")));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kBimodal, paired.pairs.ToTable()));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kReview, paired.review.review));
  PSYN_RETURN_IF_ERROR(ctx.out.WriteCsv(artifacts::kReviewKey, paired.review.key));

  int64_t remote = 0, fallback = 0, retries = 0;
  for (const ClinicalNote& note : paired.pairs.notes) {
    (note.source == NoteSource::kRemote ? remote : fallback) += 1;
    retries += note.retries;
  }
  Json client = config.text.client.ToJson();
  client["credential_env"] = kApiTokenEnv;
  const Json textgen = {{"template", options.prompt_template.ToJson()},
                        {"label_in_prompt", options.include_label},
                        {"client", client},
                        {"pairs", paired.pairs.size()},
                        {"notes_remote", remote},
                        {"notes_fallback", fallback},
                        {"retries", retries},
                        {"review_k", review_k},
                        {"privacy_cost", "none: prompts use synthetic records only "
                                         "(post-processing assumption)"}};
  PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kTextgen, textgen));
  ctx.summary = {{"pairs", paired.pairs.size()},
                 {"template_id", options.prompt_template.id},
                 {"label_in_prompt", options.include_label},
                 {"notes_remote", remote},
                 {"notes_fallback", fallback}};
  return absl::OkStatus();
}

// Up to `limit` rows drawn without replacement, in a seeded order.
Eigen::MatrixXd SampleRows(const Eigen::MatrixXd& x, int64_t limit, uint64_t seed,
                           std::string_view name) {
  std::vector<int64_t> order(x.rows());
  for (int64_t i = 0; i < x.rows(); ++i) order[i] = i;
  Rng rng = Rng::FromSeed(seed, name);
  rng.Shuffle(order);
  order.resize(std::min<int64_t>(limit, x.rows()));
  Eigen::MatrixXd out(order.size(), x.cols());
  for (size_t i = 0; i < order.size(); ++i) out.row(i) = x.row(order[i]);
  return out;
}

absl::Status Evaluate(StageContext& ctx) {
  const PipelineConfig& config = ctx.config;
  const EvaluateSection& e = config.evaluate;
  if (!fs::exists(ctx.out.Path(artifacts::kSynthetic))) {
    return MissingArtifact("synthetic dataset", ctx.out.Path(artifacts::kSynthetic));
  }
  PSYN_ASSIGN_OR_RETURN(const Schema schema, LoadRunSchema(ctx));
  PSYN_ASSIGN_OR_RETURN(const Dataset synth, LoadSynthetic(ctx, schema));
  PSYN_ASSIGN_OR_RETURN(const Dataset train,
                        LoadSplit(ctx, schema, artifacts::kTrainData, "training split"));
  PSYN_ASSIGN_OR_RETURN(const Dataset test,
                        LoadSplit(ctx, schema, artifacts::kTestData, "test split"));
  const uint64_t seed = DeriveSeed(config.seed, "evaluate");
  if (e.fidelity) {
    FidelityOptions options{e.ks_permutation, e.permutations, seed};
    PSYN_ASSIGN_OR_RETURN(const FidelityReport report, EvaluateFidelity(train, synth, options));
    PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kFidelity, report.ToJson()));
    double max_ks = 0.0, max_tvd = 0.0;
    for (const ColumnFidelity& c : report.columns) {
      if (!c.applicable) continue;
      (c.categorical ? max_tvd : max_ks) = std::max(c.categorical ? max_tvd : max_ks,
                                                    c.categorical ? c.tvd : c.ks);
    }
    ctx.summary["fidelity"] = {{"max_ks_d", max_ks}, {"max_tvd", max_tvd}};
  }
  if (e.privacy) {
    PSYN_ASSIGN_OR_RETURN(const EncoderState encoder, FitEncoder(train));
    PSYN_ASSIGN_OR_RETURN(const EncodedMatrix train_x, Encode(train, encoder));
    PSYN_ASSIGN_OR_RETURN(const EncodedMatrix test_x, Encode(test, encoder));
    PSYN_ASSIGN_OR_RETURN(const EncodedMatrix synth_x, Encode(synth, encoder));
    PrivacyReport report;
    PSYN_ASSIGN_OR_RETURN(report.distances,
                          ComputePrivacyDistances(synth_x.values, train_x.values));
    PSYN_ASSIGN_OR_RETURN(
        report.membership_auc,
        MembershipAuc(SampleRows(train_x.values, e.membership_rows, seed, "members"),
                      SampleRows(test_x.values, e.membership_rows, seed, "holdout"),
                      synth_x.values));
    PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kPrivacy, report.ToJson()));
    ctx.summary["privacy"] = {{"duplicates", report.distances.duplicates},
                              {"dcr_min", report.distances.dcr_quantiles.min},
                              {"membership_auc", *report.membership_auc}};
  }
  if (e.utility) {
    PSYN_ASSIGN_OR_RETURN(const UtilityReport report, TstrTrtr(train, test, synth, e.classifier));
    PSYN_RETURN_IF_ERROR(ctx.out.WriteJson(artifacts::kUtility, report.ToJson()));
    ctx.summary["utility"] = {{"trtr_macro_f1", report.trtr.macro_f1},
                              {"tstr_macro_f1", report.tstr.macro_f1},
                              {"delta_macro_f1", report.delta_macro_f1}};
  }
  return absl::OkStatus();
}

std::string Fmt(const Json& v) {
  if (v.is_number_float()) return absl::StrFormat("%.4f", v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "n/a";
  return v.dump();
}

absl::Status Report(StageContext& ctx) {
  const std::string manifest_path = ctx.out.Path(artifacts::kManifest);
  if (!fs::exists(manifest_path)) return MissingArtifact("run manifest", manifest_path);
  PSYN_ASSIGN_OR_RETURN(const Json manifest, ReadJsonFile(manifest_path));
  auto optional_json = [&](const char* rel) -> absl::StatusOr<Json> {
    const std::string path = ctx.out.Path(rel);
    if (!fs::exists(path)) return Json(nullptr);
    return ReadJsonFile(path);
  };

  std::string md = "# Synthetic data run report\n\n";
  absl::StrAppend(&md, "Version: ", kPsynVersion, "  \nSeed: ",
                  ctx.config.seed, "\n\n");

  md += "## Training and privacy budget\n\n";
  PSYN_ASSIGN_OR_RETURN(const Json train, optional_json(artifacts::kTrainReport));
  Json budget = Json::object();
  if (train.is_null()) {
    md += "Training stage not run.\n\n";
  } else {
    const bool dp = train["dp_enabled"].get<bool>();
    const int64_t steps = train["steps"].get<int64_t>();
    const double q = train["sampling_rate"].get<double>();
    const double sigma = train["noise_multiplier"].get<double>();
    const double delta = train["train_config"]["delta"].get<double>();
    const double reported = train["epsilon"].get<double>();
    md += "| quantity | value |\n|---|---|\n";
    absl::StrAppend(&md, "| model | ", Fmt(train["model_id"]), " |\n");
    absl::StrAppend(&md, "| DP-SGD | ", dp ? "enabled" : "disabled", " |\n");
    absl::StrAppend(&md, "| steps | ", steps, " |\n");
    absl::StrAppend(&md, "| sampling rate q | ", Fmt(train["sampling_rate"]), " |\n");
    absl::StrAppend(&md, "| noise multiplier | ", Fmt(train["noise_multiplier"]), " |\n");
    absl::StrAppend(&md, "| clip norm | ", Fmt(train["clip_norm"]), " |\n");
    absl::StrAppend(&md, "| delta | ", absl::StrFormat("%g", delta), " |\n");
    absl::StrAppend(&md, "| abort reason | ", Fmt(train["abort_reason"]), " |\n");
    if (dp && steps > 0) {
      PSYN_ASSIGN_OR_RETURN(const AccountantState state,
                            Compose(AccountantState(), steps, q, sigma));
      PSYN_ASSIGN_OR_RETURN(const EpsilonDelta recomputed, ToEpsilonDelta(state, delta));
      const bool match = std::abs(recomputed.epsilon - reported) <= 1e-9 * std::max(1.0, reported);
      absl::StrAppend(&md, "| epsilon (training) | ", absl::StrFormat("%.6f", reported), " |\n");
      absl::StrAppend(&md, "| epsilon (recomputed) | ",
                      absl::StrFormat("%.6f", recomputed.epsilon), " at alpha ",
                      recomputed.alpha, " |\n");
      absl::StrAppend(&md, "| budget check | ", match ? "consistent" : "MISMATCH", " |\n");
      budget = {{"reported", reported}, {"recomputed", recomputed.epsilon}, {"match", match}};
    }
    md += "\n";
  }

  md += "## Synthesis\n\n";
  PSYN_ASSIGN_OR_RETURN(const Json generation, optional_json(artifacts::kGeneration));
  if (generation.is_null()) {
    md += "Generation stage not run.\n\n";
  } else {
    absl::StrAppend(&md, "Plan (", Fmt(generation["plan"]["mode"]), "): ",
                    generation["plan"]["counts"].dump(), "\n\n");
    md += "| column | clamped | rate |\n|---|---|---|\n";
    for (const auto& [name, entry] : generation["clamped"].items()) {
      absl::StrAppend(&md, "| ", name, " | ", Fmt(entry["count"]), " | ", Fmt(entry["rate"]),
                      " |\n");
    }
    for (const auto& w : generation["warnings"]) absl::StrAppend(&md, "\nWarning: ", Fmt(w), "\n");
    md += "\n";
  }

  md += "## Clinical notes\n\n";
  PSYN_ASSIGN_OR_RETURN(const Json textgen, optional_json(artifacts::kTextgen));
  if (textgen.is_null()) {
    md += "Text generation stage not run.\n\n";
  } else {
    absl::StrAppend(&md, "Pairs: ", Fmt(textgen["pairs"]), " (remote ",
                    Fmt(textgen["notes_remote"]), ", fallback ", Fmt(textgen["notes_fallback"]),
                    "). Template: ", Fmt(textgen["template"]["id"]), ". Label in prompt: ",
                    textgen["label_in_prompt"].get<bool>() ? "yes" : "no",
                    ". Review sample: ", Fmt(textgen["review_k"]), ".\n\n");
    md += "Prompts are built from synthetic records only and are treated as "
          "post-processing with no additional privacy cost.\n\n";
  }

  md += "## Evaluation\n\n";
  PSYN_ASSIGN_OR_RETURN(const Json fidelity, optional_json(artifacts::kFidelity));
  if (!fidelity.is_null()) {
    md += "### Fidelity\n\n| column | W1 | KS D | KS p | TVD |\n|---|---|---|---|---|\n";
    for (const auto& c : fidelity["columns"]) {
      absl::StrAppend(&md, "| ", Fmt(c["column"]), " | ", Fmt(c.value("w1", Json())), " | ",
                      Fmt(c.value("ks_d", Json())), " | ", Fmt(c.value("ks_p", Json())), " | ",
                      Fmt(c.value("tvd", Json())), " |\n");
    }
    absl::StrAppend(&md, "\nMax correlation difference: ",
                    Fmt(fidelity["correlation"].value("max_abs_diff", Json())), "\n\n");
  }
  PSYN_ASSIGN_OR_RETURN(const Json privacy, optional_json(artifacts::kPrivacy));
  if (!privacy.is_null()) {
    md += "### Privacy diagnostics (encoded space)\n\n| metric | min | 5% | median |\n|---|---|---|---|\n";
    absl::StrAppend(&md, "| DCR | ", Fmt(privacy["dcr"]["min"]), " | ", Fmt(privacy["dcr"]["p05"]),
                    " | ", Fmt(privacy["dcr"]["median"]), " |\n");
    if (privacy["nndr"].is_object()) {
      absl::StrAppend(&md, "| NNDR | ", Fmt(privacy["nndr"]["min"]), " | ",
                      Fmt(privacy["nndr"]["p05"]), " | ", Fmt(privacy["nndr"]["median"]), " |\n");
    }
    absl::StrAppend(&md, "\nExact duplicates: ", Fmt(privacy["duplicates"]),
                    ". Membership inference AUC: ", Fmt(privacy["membership_auc"]),
                    ". These distances are diagnostics, not privacy guarantees.\n\n");
  }
  PSYN_ASSIGN_OR_RETURN(const Json utility, optional_json(artifacts::kUtility));
  if (!utility.is_null()) {
    md += "### Utility (TSTR vs TRTR)\n\n| metric | TRTR | TSTR | delta |\n|---|---|---|---|\n";
    for (const char* m : {"accuracy", "macro_f1"}) {
      absl::StrAppend(&md, "| ", m, " | ", Fmt(utility["trtr"][m]), " | ",
                      Fmt(utility["tstr"][m]), " | ", Fmt(utility["delta"][m]), " |\n");
    }
    md += "\n";
  }
  if (fidelity.is_null() && privacy.is_null() && utility.is_null()) {
    md += "Evaluation stage not run.\n";
  }
  PSYN_RETURN_IF_ERROR(ctx.out.Write(artifacts::kReport, md));
  ctx.summary = {{"dp_budget_check", budget}};
  return absl::OkStatus();
}

absl::Status Dispatch(std::string_view stage, StageContext& ctx) {
  if (stage == "bench-data") return BenchData(ctx);
  if (stage == "train") return Train(ctx);
  if (stage == "generate") return Generate(ctx);
  if (stage == "textgen") return TextGen(ctx);
  if (stage == "evaluate") return Evaluate(ctx);
  if (stage == "report") return Report(ctx);
  return absl::InvalidArgumentError(absl::StrCat("unknown subcommand '", std::string(stage), "'"));
}

absl::Status UpdateManifest(const PipelineConfig& config, std::string_view stage,
                            const StageOutputs& out, const Json& summary, double seconds) {
  Json manifest = Json::object();
  const std::string path = out.Path(artifacts::kManifest);
  if (fs::exists(path)) {
    PSYN_ASSIGN_OR_RETURN(manifest, ReadJsonFile(path));
  }
  manifest["version"] = kPsynVersion;
  manifest["config"] = config.ToJson();
  Json seeds = {{"global", config.seed}};
  for (const char* name : {"bench-data", "split", "model-init", "train", "generate", "textgen",
                           "review", "evaluate"}) {
    seeds[name] = DeriveSeed(config.seed, name);
  }
  manifest["seeds"] = seeds;
  manifest["stages"][std::string(stage)] = summary;
  if (summary.contains("dp_budget")) manifest["dp_budget"] = summary["dp_budget"];
  for (const auto& [rel, digest] : out.digests()) manifest["artifacts"][rel] = digest;
  PSYN_RETURN_IF_ERROR(WriteFile(path, manifest.dump(2) + "\n"));

  Json timings = Json::object();
  const std::string timings_path = out.Path(artifacts::kTimings);
  if (fs::exists(timings_path)) {
    PSYN_ASSIGN_OR_RETURN(timings, ReadJsonFile(timings_path));
  }
  timings[std::string(stage)] = {{"seconds", seconds}};
  return WriteFile(timings_path, timings.dump(2) + "\n");
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  switch (status.code()) {
    case absl::StatusCode::kResourceExhausted:
      return kExitBudget;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
      return kExitNetwork;
    default:
      return kExitData;
  }
}

const std::vector<std::string>& StageNames() {
  static const auto* names = new std::vector<std::string>{
      "bench-data", "train", "generate", "textgen", "evaluate", "report"};
  return *names;
}

uint64_t DeriveSeed(uint64_t seed, std::string_view name) {
  return Rng::FromSeed(seed, name).NextU64();
}

absl::Status RunStage(std::string_view stage, const PipelineConfig& config) {
  if (std::find(StageNames().begin(), StageNames().end(), stage) == StageNames().end()) {
    return absl::InvalidArgumentError(absl::StrCat("unknown subcommand '", std::string(stage), "'"));
  }
  const fs::path root(config.output_dir);
  PSYN_ASSIGN_OR_RETURN(const std::unique_ptr<OutputLock> lock, OutputLock::Acquire(root));
  StageOutputs out(root);
  StageContext ctx{config, out};
  const auto start = std::chrono::steady_clock::now();
  absl::Status status = Dispatch(stage, ctx);
  if (status.ok()) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    status = UpdateManifest(config, stage, out, ctx.summary, seconds);
  }
  if (!status.ok()) out.Rollback();
  return status;
}

absl::Status RunAll(const PipelineConfig& config) {
  for (const std::string& stage : StageNames()) {
    PSYN_RETURN_IF_ERROR(RunStage(stage, config));
  }
  return absl::OkStatus();
}

}  // namespace psyn
