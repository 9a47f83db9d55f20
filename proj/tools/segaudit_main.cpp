// segaudit: label-quality scoring, error injection, and detection evaluation
// for semantic-segmentation datasets.
//
//   segaudit score    --manifest m.json --out report.csv [--methods softmin,cil]
//   segaudit inject   --manifest m.json --type drop --proportion 0.2 --seed 7 --out-dir d
//   segaudit evaluate --report report.csv --error-log d/error_log.jsonl [--out eval.json]
//   segaudit overlay  --manifest m.json --threshold 0.1 --out-dir overlays
//   segaudit synth    --out-dir data [--num-images 500]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segaudit/dataset_io.hpp"
#include "segaudit/errors.hpp"
#include "segaudit/pipeline.hpp"
#include "segaudit/synthetic.hpp"

namespace {

using namespace segaudit;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInfeasible = 4;

int Fail(int code, const std::string& message) {
  std::cerr << "segaudit: error: " << message << "\n";
  return code;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct ScoreArgs {
  std::string manifest;
  std::string methods = "all";
  double tau = 0.1;
  std::vector<double> tccp_thresholds;
  std::string tccp_mode = "agreement";
  int downsample = kDefaultPoolFactor;
  int connectivity = 4;
  std::string coco_pooling = "flat";
  std::string out;
  std::string format = "csv";
  unsigned threads = 1;
  std::optional<double> overlay_threshold;
  std::string overlay_dir = "overlays";
};

struct InjectArgs {
  std::string manifest;
  std::string type;
  double proportion = 0.2;
  std::uint64_t seed = 0;
  int radius_min = 3;
  int radius_max = 25;
  std::string out_dir;
  unsigned threads = 1;
};

struct EvaluateArgs {
  std::string report;
  std::string error_log;
  std::string out;
};

struct OverlayArgs {
  std::string manifest;
  double threshold = 0.1;
  int downsample = kDefaultPoolFactor;
  std::vector<std::string> image_ids;
  std::string out_dir;
  unsigned threads = 1;
};

struct SynthArgs {
  std::string out_dir;
  SyntheticConfig config;
  unsigned threads = 1;
};

int RunScore(const ScoreArgs& args) {
  ScoreConfig config;
  if (args.methods != "all") {
    config.methods.clear();
    for (const std::string& name : SplitList(args.methods)) {
      config.methods.push_back(ParseMethod(name));
    }
  }
  config.softmin.tau = args.tau;
  if (!args.tccp_thresholds.empty()) config.tccp.thresholds = args.tccp_thresholds;
  if (args.tccp_mode == "literal") {
    config.tccp.mode = TccpMode::kLiteral;
  } else if (args.tccp_mode != "agreement") {
    throw ValidationError("--tccp-mode must be 'agreement' or 'literal'");
  }
  config.pool_factor = args.downsample;
  config.coco.connectivity =
      args.connectivity == 8 ? Connectivity::kEight : Connectivity::kFour;
  if (args.coco_pooling == "class") {
    config.coco.pooling = ComponentPooling::kClassMean;
  } else if (args.coco_pooling != "flat") {
    throw ValidationError("--coco-pooling must be 'flat' or 'class'");
  }
  config.threads = args.threads;
  config.overlay_threshold = args.overlay_threshold;
  config.overlay_dir = args.overlay_dir;
  const ReportFormat format = ParseReportFormat(args.format);
  config.Validate();

  const DatasetManifest manifest = ReadManifest(args.manifest);
  const ScoreOutput output = ScoreDataset(manifest, config);
  WriteReport(output.records, args.out, format);
  std::cerr << "scored " << manifest.entries.size() << " images x "
            << config.methods.size() << " methods -> " << args.out << "\n";
  return kExitOk;
}

int RunInject(const InjectArgs& args) {
  CorruptionPlan plan;
  plan.error_type = ParseErrorType(args.type);
  plan.proportion = args.proportion;
  plan.seed = args.seed;
  plan.shift_radius_range = {args.radius_min, args.radius_max};
  plan.Validate();

  const DatasetManifest manifest = ReadManifest(args.manifest);
  const CorruptionOutput output =
      CorruptDataset(manifest, plan, args.out_dir, args.threads);
  std::size_t corrupted = 0;
  for (const ErrorLog& log : output.logs) corrupted += log.is_error();
  std::cerr << "corrupted " << corrupted << " of " << output.logs.size()
            << " images -> " << args.out_dir << "\n";
  return kExitOk;
}

int RunEvaluate(const EvaluateArgs& args) {
  const std::vector<ScoreRecord> records = ReadReport(args.report);
  const std::vector<ErrorLog> logs = ReadErrorLog(args.error_log);
  const auto table = EvaluateReport(records, logs);
  if (args.out.empty()) {
    std::cout << SerializeEvaluation(table);
  } else {
    WriteEvaluation(args.out, table);
  }
  std::fprintf(stderr, "%-8s %7s %7s %9s %11s %9s %11s\n", "method", "AUROC",
               "AUPRC", "Lift@E", "Lift@100", "Prec@E", "Prec@100");
  for (const auto& [method, m] : table) {
    std::fprintf(stderr, "%-8s %7.3f %7.3f %9.3f %11.3f %9.3f %11.3f\n",
                 std::string(ToString(method)).c_str(), m.auroc, m.auprc,
                 m.lift_at_errors, m.lift_at_100, m.precision_at_errors,
                 m.precision_at_100);
  }
  return kExitOk;
}

int RunOverlay(const OverlayArgs& args) {
  OverlayConfig config;
  config.threshold = args.threshold;
  config.pool_factor = args.downsample;
  config.threads = args.threads;
  config.image_ids = args.image_ids;
  const DatasetManifest manifest = ReadManifest(args.manifest);
  const auto infos = EmitOverlays(manifest, config, args.out_dir);
  for (const auto& [id, info] : infos) {
    std::cout << id << "\t" << info.marked_pixels << "\n";
  }
  return kExitOk;
}

int RunSynth(const SynthArgs& args) {
  const DatasetManifest manifest =
      WriteSyntheticDataset(args.config, args.out_dir, args.threads);
  std::cerr << "wrote " << manifest.entries.size() << " synthetic images -> "
            << args.out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-quality scoring for semantic segmentation datasets"};
  app.require_subcommand(1);

  const auto in_unit_interval = [](const std::string& text) -> std::string {
    try {
      const double v = std::stod(text);
      if (v > 0.0 && v <= 1.0) return {};
    } catch (const std::exception&) {
    }
    return "must be a number in (0, 1]";
  };

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score every image of a manifest");
  score_cmd->add_option("--manifest", score.manifest, "Dataset manifest (JSON)")->required();
  score_cmd->add_option("--methods", score.methods,
                        "Comma-separated subset of ccp,tccp,cil,softmin,clc,iou,coco or 'all'");
  score_cmd->add_option("--tau", score.tau, "Softmin temperature")->check(CLI::PositiveNumber);
  score_cmd->add_option("--tccp-thresholds", score.tccp_thresholds,
                        "TCCP threshold set (default 0.05..0.95)")->delimiter(',');
  score_cmd->add_option("--tccp-mode", score.tccp_mode, "agreement|literal");
  score_cmd->add_option("--downsample", score.downsample, "Pool factor for CLC/CoCo")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--connectivity", score.connectivity, "CoCo connectivity (4 or 8)")
      ->check(CLI::IsMember({4, 8}));
  score_cmd->add_option("--coco-pooling", score.coco_pooling, "flat|class");
  score_cmd->add_option("--out", score.out, "Report path")->required();
  score_cmd->add_option("--format", score.format, "csv|json");
  score_cmd->add_option("--threads", score.threads, "Worker threads");
  score_cmd->add_option("--overlay-threshold", score.overlay_threshold,
                        "Emit overlays marking s < threshold or flagged pixels")
      ->check(CLI::Range(0.0, 1.0));
  score_cmd->add_option("--overlay-dir", score.overlay_dir, "Overlay output directory");

  InjectArgs inject;
  auto* inject_cmd = app.add_subcommand("inject", "Inject synthetic annotation errors");
  inject_cmd->add_option("--manifest", inject.manifest, "Clean dataset manifest")->required();
  inject_cmd->add_option("--type", inject.type, "drop|swap|shift")
      ->required()
      ->check(CLI::IsMember({"drop", "swap", "shift"}, CLI::ignore_case));
  inject_cmd->add_option("--proportion", inject.proportion, "Fraction of images to corrupt")
      ->check(in_unit_interval);
  inject_cmd->add_option("--seed", inject.seed, "Generator seed");
  inject_cmd->add_option("--shift-radius-min", inject.radius_min, "Smallest Shift radius")
      ->check(CLI::PositiveNumber);
  inject_cmd->add_option("--shift-radius-max", inject.radius_max, "Largest Shift radius")
      ->check(CLI::PositiveNumber);
  inject_cmd->add_option("--out-dir", inject.out_dir, "Output directory")->required();
  inject_cmd->add_option("--threads", inject.threads, "Worker threads");

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a score report against an error log");
  eval_cmd->add_option("--report", evaluate.report, "Score report (CSV or JSON)")->required();
  eval_cmd->add_option("--error-log", evaluate.error_log, "error_log.jsonl")->required();
  eval_cmd->add_option("--out", evaluate.out, "Evaluation JSON (stdout if omitted)");

  OverlayArgs overlay;
  auto* overlay_cmd = app.add_subcommand("overlay", "Write suggested-error overlay masks");
  overlay_cmd->add_option("--manifest", overlay.manifest, "Dataset manifest")->required();
  overlay_cmd->add_option("--threshold", overlay.threshold, "Pixel score threshold")
      ->check(CLI::Range(0.0, 1.0));
  overlay_cmd->add_option("--downsample", overlay.downsample, "Pool factor for flags")
      ->check(CLI::PositiveNumber);
  overlay_cmd->add_option("--image-id", overlay.image_ids, "Restrict to these images");
  overlay_cmd->add_option("--out-dir", overlay.out_dir, "Output directory")->required();
  overlay_cmd->add_option("--threads", overlay.threads, "Worker threads");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--num-images", synth.config.num_images)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--height", synth.config.height)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--width", synth.config.width)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--classes", synth.config.num_classes)->check(CLI::Range(2, 256));
  synth_cmd->add_option("--seed", synth.config.seed);
  synth_cmd->add_option("--threads", synth.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*score_cmd) return RunScore(score);
    if (*inject_cmd) return RunInject(inject);
    if (*eval_cmd) return RunEvaluate(evaluate);
    if (*overlay_cmd) return RunOverlay(overlay);
    if (*synth_cmd) return RunSynth(synth);
  } catch (const IoError& e) {
    return Fail(kExitIo, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(kExitIo, e.what());
  } catch (const InfeasiblePlanError& e) {
    return Fail(kExitInfeasible, e.what());
  } catch (const Error& e) {
    return Fail(kExitValidation, e.what());
  } catch (const std::exception& e) {
    return Fail(1, e.what());
  }
  return kExitValidation;
}
