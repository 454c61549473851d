// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "afford/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "afford/annotate.hpp"
#include "afford/core.hpp"
#include "afford/errors.hpp"
#include "afford/graspgen.hpp"
#include "afford/http_clients.hpp"
#include "afford/instructions.hpp"
#include "afford/io.hpp"
#include "afford/metrics.hpp"
#include "afford/parallel.hpp"
#include "afford/predict.hpp"
#include "afford/projection.hpp"
#include "afford/wire.hpp"

namespace afford::cli {

namespace fs = std::filesystem;
using wire::Json;

namespace {

struct Options {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = default_jobs();
  std::size_t count = 0;
  std::string predictor = "oracle";
  std::string predictor_endpoint;
  bool predictor_serial = false;
  double centerbox_fraction = 0.25;
  std::string ground_endpoint;
  std::string segment_endpoint;
  std::string llm_endpoint;
  std::string llm_model = "gpt-4";
  std::size_t max_in_flight = 4;
  std::string mode = "template";
  std::string config;
  std::string aliases;
  std::string human_results;
  std::uint64_t min_area = 25;
  std::size_t min_points = 50;
  double finger_margin = 0.005;
  double max_width = 0.085;
  bool strict = false;
  bool in_place = false;
  bool force = false;
};

fs::path output_path(const Options& o) {
  if (o.out.empty()) {
    if (o.in_place) return o.manifest;
    throw UsageError("--out is required (or --in-place to rewrite the manifest)");
  }
  std::error_code ec;
  if (!o.in_place && fs::exists(o.out) && fs::equivalent(o.out, o.manifest, ec))
    throw UsageError("--out would overwrite the input manifest; pass --in-place to allow it");
  return o.out;
}

void require_manifest(const Options& o) {
  if (!fs::is_regular_file(o.manifest))
    throw IoError("manifest not found: " + o.manifest);
}

void write_json_line(std::ostream& os, const Json& j) { os << j.dump() << '\n'; }

int cmd_validate(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto m = core::load_manifest(o.manifest);
  const auto report = core::validate_manifest(m, o.strict);
  Json j;
  j["records"] = m.records.size();
  j["violations"] = Json::array();
  for (const auto& v : report)
    j["violations"].push_back(
        {{"recordId", v.record_id}, {"invariant", v.invariant}, {"message", v.message}});
  if (!o.out.empty()) io::write_file_atomic(o.out, j.dump(2) + "\n");
  out << j.dump(2) << '\n';
  return report.empty() ? kOk : kViolations;
}

int cmd_sample(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto dest = output_path(o);
  const auto m = core::load_manifest(o.manifest);
  const auto subset = core::sample_subset(m, o.count, o.seed);
  io::write_file_atomic(dest, core::serialize_manifest(subset));
  write_json_line(out, {{"records", subset.records.size()}, {"seed", o.seed}});
  return kOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto m = core::load_manifest(o.manifest);
  std::map<std::string, std::size_t> category, domain, kind, reasoning, split, provenance;
  std::map<std::string, std::map<std::string, std::size_t>> category_kind;
  for (const auto& r : m.records) {
    ++category[r.category.name];
    ++domain[std::string(core::to_string(r.domain))];
    const std::string k =
        r.instruction ? std::string(core::to_string(r.instruction->kind)) : "missing";
    ++kind[k];
    ++category_kind[r.category.name][k];
    ++reasoning[std::string(core::to_string(r.splits.reasoning))];
    std::string s(core::to_string(r.splits.split));
    if (r.splits.zero_shot_category) s += "+zero-shot-category";
    if (r.splits.zero_shot_domain) s += "+zero-shot-domain";
    ++split[s];
    ++provenance[r.provenance ? std::string(core::to_string(r.provenance->tool)) : "none"];
  }
  Json j;
  j["records"] = m.records.size();
  j["categories"] = category.size();
  j["perCategory"] = category;
  j["perDomain"] = domain;
  j["perInstructionKind"] = kind;
  j["perCategoryInstructionKind"] = category_kind;
  j["perReasoningKind"] = reasoning;
  j["perSplit"] = split;
  j["perProvenance"] = provenance;
  const std::string text = j.dump(2) + "\n";
  if (!o.out.empty()) io::write_file_atomic(o.out, text);
  out << text;
  return kOk;
}

std::unique_ptr<predict::MaskPredictor> make_predictor(const Options& o,
                                                       const core::DatasetManifest& m) {
  if (o.predictor == "oracle") return std::make_unique<predict::OraclePredictor>(m);
  if (o.predictor == "empty") return std::make_unique<predict::EmptyPredictor>();
  if (o.predictor == "centerbox")
    return std::make_unique<predict::CenterBoxPredictor>(o.centerbox_fraction);
  if (o.predictor == "remote") {
    if (o.predictor_endpoint.empty())
      throw UsageError("--predictor remote needs --predictor-endpoint");
    return std::make_unique<http::RemotePredictor>(o.predictor_endpoint, !o.predictor_serial);
  }
  throw UsageError("unknown predictor \"" + o.predictor + "\"");
}

int cmd_eval(const Options& o, std::ostream& out) {
  require_manifest(o);
  if (o.out.empty()) throw UsageError("--out is required");
  const auto dest = output_path(o);
  const auto m = core::load_manifest(o.manifest);
  auto predictor = make_predictor(o, m);
  const auto report = metrics::evaluate_benchmark(m, *predictor, o.jobs);
  const auto table = metrics::report_table(report);
  io::write_file_atomic(dest, metrics::report_to_json(report).dump(2) + "\n");
  io::write_file_atomic(dest.string() + ".txt", table);
  out << table;
  return kOk;
}

int cmd_posegen(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto dest = output_path(o);
  const auto m = core::load_manifest(o.manifest);
  grasp::GripperSpec<double> gripper;
  gripper.max_width = o.max_width;
  gripper.finger_margin = o.finger_margin;
  gripper.min_points = o.min_points;
  if (!(gripper.max_width > 0) || !(gripper.finger_margin >= 0))
    throw UsageError("--max-width must be > 0 and --finger-margin >= 0");

  std::vector<Json> lines(m.records.size());
  parallel_for(m.records.size(), o.jobs, [&](std::size_t i) {
    const auto& r = m.records[i];
    Json j;
    j["recordId"] = r.id;
    try {
      if (!r.mask) throw UsageError("record has no mask");
      if (!r.depth) throw UsageError("record has no depth image");
      if (!r.camera) throw UsageError("record has no camera");
      if (!r.camera->intrinsics.valid()) throw UsageError("invalid camera intrinsics");
      if (!r.camera->extrinsics.valid()) throw NonRigidTransform("extrinsics are not rigid");
      const auto depth = io::load_depth_png(core::resolve(m.header, *r.depth));
      const auto mask = mask::rle_decode(*r.mask);
      const auto cloud = geom::backproject_masked(mask, depth, r.camera->intrinsics,
                                                  r.camera->extrinsics);
      const auto pose =
          grasp::propose_grasp(cloud, r.camera->intrinsics, r.camera->extrinsics, gripper);
      const Json pj = wire::pose_to_json(pose);
      for (const auto& [k, v] : pj.items()) j[k] = v;
      j["points"] = cloud.size();
    } catch (const Error& e) {
      j["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    }
    lines[i] = std::move(j);
  });

  std::string text;
  std::size_t ok = 0;
  for (const auto& j : lines) {
    text += j.dump() + "\n";
    ok += j.contains("error") ? 0 : 1;
  }
  io::write_file_atomic(dest, text);
  write_json_line(out, {{"records", m.records.size()}, {"poses", ok},
                        {"failed", m.records.size() - ok}});
  return kOk;
}

int cmd_annotate(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto dest = output_path(o);
  auto m = core::load_manifest(o.manifest);
  const auto config = annotate::load_composition_config(
      o.config.empty() ? annotate::default_composition_path() : fs::path(o.config));

  annotate::BackendSet backends;
  backends.parts = config.parts;
  backends.min_area = o.min_area;
  if (!o.ground_endpoint.empty()) {
    auto ground = std::make_shared<http::HttpBackend>(o.ground_endpoint);
    backends.grounding = ground;
    backends.part_grounding = ground;
  }
  if (!o.segment_endpoint.empty())
    backends.segmenter = std::make_shared<http::HttpBackend>(o.segment_endpoint);

  const fs::path results_path =
      o.human_results.empty() ? fs::path(o.manifest + ".human.results.jsonl")
                              : fs::path(o.human_results);
  const auto human_results = annotate::read_human_results(results_path);

  enum class Status { kKept, kAnnotated, kHuman, kPending, kUnresolved };
  struct Outcome {
    Status status = Status::kKept;
    std::vector<annotate::ToolId> plan;
    annotate::CascadeResult cascade;
  };
  std::vector<Outcome> outcomes(m.records.size());
  annotate::HumanQueue queue;

  parallel_for(m.records.size(), o.jobs, [&](std::size_t i) {
    auto& r = m.records[i];
    auto& oc = outcomes[i];
    if (r.mask && !o.force) return;
    if (auto it = human_results.find(r.id); it != human_results.end()) {
      r.mask = it->second.mask;
      r.provenance = core::ProvenanceTag{it->second.with_segmenter
                                             ? core::ProvenanceTool::kHumanSegmenter
                                             : core::ProvenanceTool::kHuman,
                                         "T5_human"};
      oc.status = Status::kHuman;
      return;
    }
    const auto task = annotate::task_from_record(r, m.header);
    oc.plan = annotate::plan_tools(task, config.for_dataset(r.inputs.dataset), config.parts);
    // Each task queues into its own slot; the spool is assembled in
    // manifest order afterwards so output does not depend on --jobs.
    annotate::HumanQueue local;
    oc.cascade = annotate::run_cascade(task, oc.plan, backends, local);
    if (oc.cascade.final_mask) {
      r.mask = oc.cascade.final_mask;
      r.provenance = oc.cascade.provenance;
      oc.status = Status::kAnnotated;
    } else if (oc.cascade.sent_to_human) {
      for (auto& t : local.tasks()) queue.enqueue(t);
      oc.status = Status::kPending;
    } else {
      oc.status = Status::kUnresolved;
    }
  });

  // Spool: pending tasks in manifest order.
  std::vector<annotate::HumanTask> spool;
  std::string trace;
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& oc = outcomes[i];
    const char* status = "kept";
    switch (oc.status) {
      case Status::kKept: status = "kept"; break;
      case Status::kAnnotated: status = "annotated"; break;
      case Status::kHuman: status = "human"; break;
      case Status::kPending: status = "pending"; break;
      case Status::kUnresolved: status = "unresolved"; break;
    }
    ++counts[status];
    if (oc.status == Status::kPending)
      spool.push_back({m.records[i].id, m.records[i].image, m.records[i].category.name});
    if (oc.plan.empty()) continue;
    Json j;
    j["recordId"] = m.records[i].id;
    j["status"] = status;
    j["plan"] = Json::array();
    for (auto t : oc.plan) j["plan"].push_back(annotate::to_string(t));
    j["trace"] = Json::array();
    for (const auto& step : oc.cascade.trace)
      j["trace"].push_back({{"tool", annotate::to_string(step.tool)},
                            {"status", annotate::to_string(step.status)},
                            {"note", step.note}});
    trace += j.dump() + "\n";
  }

  io::write_file_atomic(dest, core::serialize_manifest(m));
  io::write_file_atomic(dest.string() + ".human.jsonl", annotate::format_human_spool(spool));
  io::write_file_atomic(dest.string() + ".trace.jsonl", trace);
  Json summary = counts;
  summary["records"] = m.records.size();
  write_json_line(out, summary);
  return kOk;
}

std::map<std::string, std::vector<std::string>> load_aliases(const std::string& path) {
  std::map<std::string, std::vector<std::string>> aliases;
  const fs::path p = path.empty() ? fs::path(AFFORD_CONFIG_DIR) / "category_aliases.json"
                                  : fs::path(path);
  if (!fs::exists(p)) {
    if (!path.empty()) throw IoError("alias file not found: " + path);
    return aliases;
  }
  try {
    const auto j = nlohmann::json::parse(io::read_file(p));
    for (const auto& [k, v] : j.items()) aliases[k] = v.get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, p.string() + ": " + e.what());
  }
  return aliases;
}

int cmd_instructions(const Options& o, std::ostream& out) {
  require_manifest(o);
  const auto dest = output_path(o);
  auto m = core::load_manifest(o.manifest);

  if (o.mode == "template") {
    for (auto& r : m.records) {
      r.instruction = instr::build_template(r.category);
      r.splits.reasoning = core::ReasoningKind::kTemplate;
    }
    io::write_file_atomic(dest, core::serialize_manifest(m));
    write_json_line(out, {{"mode", "template"}, {"records", m.records.size()}});
    return kOk;
  }
  if (o.mode != "easy" && o.mode != "hard")
    throw UsageError("--mode must be template, easy or hard");
  const auto mode = o.mode == "easy" ? instr::Mode::kEasy : instr::Mode::kHard;
  if (o.llm_endpoint.empty())
    throw UsageError("--mode " + o.mode + " needs --llm-endpoint (or \"stub\" for offline)");

  std::unique_ptr<instr::ChatClient> client;
  if (o.llm_endpoint == "stub") {
    client = std::make_unique<instr::StubChatClient>();
  } else {
    const char* key = std::getenv("AFFORD_LLM_KEY");
    client = std::make_unique<http::HttpChatClient>(o.llm_endpoint, key ? key : "");
  }

  const auto extra = load_aliases(o.aliases);
  std::vector<instr::GenerationRequest> requests;
  for (const auto& r : m.records) {
    instr::GenerationRequest req{r.id, r.category, std::nullopt};
    if (auto it = extra.find(r.category.name); it != extra.end())
      for (const auto& a : it->second)
        if (a != r.category.name &&
            std::find(req.category.aliases.begin(), req.category.aliases.end(), a) ==
                req.category.aliases.end())
          req.category.aliases.push_back(a);
    requests.push_back(std::move(req));
  }
  const auto result =
      instr::generate_reasoning(requests, mode, *client, o.llm_model, o.max_in_flight);

  std::map<std::string, const instr::GeneratedInstructionPair*> by_id;
  for (const auto& [id, pair] : result.accepted) by_id[id] = &pair;
  core::DatasetManifest fragment;
  fragment.header = m.header;
  for (auto& r : m.records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) continue;
    r.instruction = core::InstructionSpec{
        mode == instr::Mode::kEasy ? core::InstructionKind::kEasy : core::InstructionKind::kHard,
        it->second->first};
    r.splits.reasoning =
        mode == instr::Mode::kEasy ? core::ReasoningKind::kEasy : core::ReasoningKind::kHard;
    fragment.records.push_back(r);
  }
  io::write_file_atomic(dest, core::serialize_manifest(fragment));

  Json stats;
  stats["mode"] = o.mode;
  stats["requested"] = requests.size();
  stats["accepted"] = result.accepted.size();
  Json per = Json::object();
  for (const auto& [cat, s] : result.per_category)
    per[cat] = {{"requested", s.requested},
                {"accepted", s.accepted},
                {"constraintViolations", s.constraint_violations},
                {"malformed", s.malformed},
                {"clientErrors", s.client_errors},
                {"duplicates", s.duplicates}};
  stats["perCategory"] = std::move(per);
  write_json_line(out, stats);
  return kOk;
}

int cmd_export_masks(const Options& o, std::ostream& out) {
  require_manifest(o);
  if (o.out.empty()) throw UsageError("--out DIR is required");
  const auto m = core::load_manifest(o.manifest);
  fs::create_directories(o.out);
  std::size_t written = 0;
  for (const auto& r : m.records) {
    if (!r.mask) continue;
    io::write_mask_png(fs::path(o.out) / (r.id + ".png"), mask::rle_decode(*r.mask));
    ++written;
  }
  write_json_line(out, {{"masks", written}});
  return kOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Affordance dataset, benchmark and grasp-pose toolkit", "afford"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and flag");

  const auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", o.manifest, "Input manifest (JSON Lines)")->required();
  };
  const auto add_out = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--out", o.out, what);
  };
  const auto add_in_place = [&](CLI::App* sub) {
    sub->add_flag("--in-place", o.in_place, "Allow the output to replace the input manifest");
  };
  const auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", o.jobs, "Record-level parallelism")->check(CLI::PositiveNumber);
  };
  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check every manifest invariant");
  add_manifest(validate);
  add_out(validate, "Also write the report here");
  validate->add_flag("--strict", o.strict, "Also check that referenced files exist");

  auto* sample = app.add_subcommand("sample", "Draw a seeded subset of records");
  add_manifest(sample);
  add_out(sample, "Output manifest");
  add_in_place(sample);
  add_seed(sample);
  sample->add_option("--count", o.count, "Number of records to keep")->required();

  auto* annotate_cmd =
      app.add_subcommand("annotate", "Run the annotation tool cascade over unmasked records");
  add_manifest(annotate_cmd);
  add_out(annotate_cmd, "Output manifest; spool and trace are written next to it");
  add_in_place(annotate_cmd);
  add_jobs(annotate_cmd);
  add_seed(annotate_cmd);
  annotate_cmd->add_option("--ground-endpoint", o.ground_endpoint,
                           "Grounding backend URL (serves /ground and /ground_part)");
  annotate_cmd->add_option("--segment-endpoint", o.segment_endpoint,
                           "Segmenter backend URL (serves /segment); boxes are rasterized "
                           "when absent");
  annotate_cmd->add_option("--config", o.config, "Tool composition config (JSON)");
  annotate_cmd->add_option("--human-results", o.human_results,
                           "Resolved human annotations (default <manifest>.human.results.jsonl)");
  annotate_cmd->add_option("--min-area", o.min_area,
                           "Automated masks smaller than this many pixels fail")
      ->capture_default_str();
  annotate_cmd->add_flag("--force", o.force, "Re-annotate records that already have masks");

  auto* instructions = app.add_subcommand("instructions", "Generate instructions");
  add_manifest(instructions);
  add_out(instructions, "Output manifest fragment");
  add_in_place(instructions);
  add_seed(instructions);
  instructions->add_option("--mode", o.mode, "template, easy or hard")
      ->check(CLI::IsMember({"template", "easy", "hard"}))
      ->capture_default_str();
  instructions->add_option("--llm-endpoint", o.llm_endpoint,
                           "Chat-completion URL, or \"stub\" for the offline client");
  instructions->add_option("--llm-model", o.llm_model, "Model name")->capture_default_str();
  instructions->add_option("--max-in-flight", o.max_in_flight, "Concurrent LLM requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  instructions->add_option("--aliases", o.aliases, "Category alias config (JSON)");

  auto* eval = app.add_subcommand("eval", "Evaluate a predictor (gIoU / cIoU)");
  add_manifest(eval);
  add_out(eval, "Report JSON; the text table goes to <out>.txt");
  add_jobs(eval);
  add_seed(eval);
  eval->add_option("--predictor", o.predictor, "oracle, empty, centerbox or remote")
      ->check(CLI::IsMember({"oracle", "empty", "centerbox", "remote"}))
      ->capture_default_str();
  eval->add_option("--predictor-endpoint", o.predictor_endpoint, "Remote predictor URL");
  eval->add_flag("--predictor-serial", o.predictor_serial,
                 "The remote predictor cannot take concurrent requests");
  eval->add_option("--centerbox-fraction", o.centerbox_fraction,
                   "Image area covered by the centerbox predictor")
      ->capture_default_str();

  auto* posegen = app.add_subcommand("posegen", "Lift masks with depth and propose grasps");
  add_manifest(posegen);
  add_out(posegen, "Pose JSON Lines output");
  add_jobs(posegen);
  add_seed(posegen);
  posegen->add_option("--min-points", o.min_points, "Minimum cloud size")->capture_default_str();
  posegen->add_option("--finger-margin", o.finger_margin, "Meters added per finger")
      ->capture_default_str();
  posegen->add_option("--max-width", o.max_width, "Gripper opening in meters")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Count records per category, domain and kind");
  add_manifest(stats);
  add_out(stats, "Also write the counts here");

  auto* export_masks = app.add_subcommand("export-masks", "Write masks as 0/255 PNG files");
  add_manifest(export_masks);
  add_out(export_masks, "Output directory");

  std::vector<std::string> argv_store{"afford"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "UsageError", e.what());
    return kFailure;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*sample) return cmd_sample(o, out);
    if (*annotate_cmd) return cmd_annotate(o, out);
    if (*instructions) return cmd_instructions(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*posegen) return cmd_posegen(o, out);
    if (*stats) return cmd_stats(o, out);
    if (*export_masks) return cmd_export_masks(o, out);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what());
    return kFailure;
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return kFailure;
  }
  report_error(err, "UsageError", "no subcommand");
  return kFailure;
}

}  // namespace afford::cli
