#include "clinn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "clinn/corpus.hpp"
#include "clinn/error.hpp"
#include "clinn/metrics.hpp"
#include "clinn/report.hpp"
#include "clinn/rule_dsl.hpp"
#include "clinn/tracker.hpp"

namespace clinn {
namespace {

struct Options {
  std::string config;
  std::string rules;
  std::string corpus;
  std::string db;
  std::string predictions;
  std::string out;
  std::string mode = "full";
  std::string match = "subset";
  std::string engine = "base";
  std::string context = "tracked";
  std::string seed_label;
  std::string dialogue;
  std::string kind;
  std::string metric;
  std::string out_corpus;
  std::string out_rules;
  std::vector<std::string> agree_files;
  std::vector<std::string> reports_a;
  std::vector<std::string> reports_b;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

int ExitFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingPrediction:
    case ErrorKind::kUnboundEffectVariable:
    case ErrorKind::kCorpusEmpty:
    case ErrorKind::kNoTurns:
    case ErrorKind::kNoPairs:
      return kExitRuntime;
    default:
      return kExitInput;
  }
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::kFileNotFound, "cannot write file: " + path);
  file << content;
  if (!file) throw Error(ErrorKind::kFileNotFound, "failed writing file: " + path);
}

Ontology OntologyFor(const Options& o) {
  return o.config.empty() ? Ontology::RestaurantDefault() : LoadOntology(o.config);
}

TrackerConfig ConfigFor(const Options& o) {
  TrackerConfig config;
  config.engine = o.engine == "hybrid" ? Engine::kHybrid : Engine::kBase;
  config.apply_mode = o.mode == "free" ? ApplyMode::kFree : ApplyMode::kFull;
  config.match_mode = o.match == "exactset" ? MatchMode::kExactSet : MatchMode::kSubset;
  config.context_source = o.context == "oracle" ? ContextSource::kOracle : ContextSource::kTracked;
  return config;
}

template <typename T>
std::string Join(const std::vector<T>& items) {
  std::vector<std::string> parts;
  for (const auto& item : items) parts.push_back(ToString(item));
  return fmt::format("{{{}}}", fmt::join(parts, ", "));
}

int Validate(const Options& o, std::ostream& out) {
  const Ontology ontology = OntologyFor(o);
  const RuleSet rules = LoadRules(o.rules, ontology);
  out << fmt::format("{} rules ({} belief, {} action)\n", rules.size(),
                     rules.belief_rules.size(), rules.action_rules.size());
  for (const auto& warning : FilterForMode(rules, ApplyMode::kFree).warnings) {
    out << "note: " << ToString(warning) << "\n";
  }
  return kExitOk;
}

struct LoadedRun {
  Ontology ontology;
  RuleSet rules;
  RestaurantDb db;
  Corpus corpus;
  PredictionMap predictions;
};

LoadedRun LoadRun(const Options& o, TrackerConfig& config) {
  LoadedRun run{OntologyFor(o), {}, {}, {}, {}};
  run.rules = LoadRules(o.rules, run.ontology);
  run.corpus = LoadCorpus(o.corpus, run.ontology);
  run.db = LoadDb(o.db, run.ontology);
  if (!o.predictions.empty()) {
    run.predictions = LoadPredictions(o.predictions, run.ontology);
  } else if (config.engine == Engine::kHybrid) {
    throw CLI::ValidationError("--predictions", "required with --engine hybrid");
  }
  return run;
}

int Replay(const Options& o, std::ostream& out) {
  TrackerConfig config = ConfigFor(o);
  const LoadedRun run = LoadRun(o, config);
  RunOptions options;
  if (!o.seed_label.empty()) options.seed_label = o.seed_label;
  options.jobs = o.jobs;
  const TrackerInputs inputs{run.rules, run.db, run.ontology,
                             o.predictions.empty() ? nullptr : &run.predictions};
  const EvalReport report = RunCorpus(run.corpus, inputs, config, options);
  WriteFile(o.out, SerializeReport(report));
  out << fmt::format(
      "{}: action_f1={:.6f} joint_goal={:.6f} slot_acc={:.6f} slot_f1={:.6f} "
      "({} dialogues, {} turns)\n",
      report.label, report.action_f1, report.joint_goal, report.slot_accuracy, report.slot_f1,
      report.dialogue_count, report.turn_count);
  return kExitOk;
}

void PrintContext(std::ostream& out, const char* title, const MatchContext& ctx) {
  out << fmt::format("  {} context: user={} belief={} prev_action={} db={}\n", title,
                     Join(CanonicalSorted(ctx.user)), ToString(ctx.belief),
                     Join(CanonicalSorted(ctx.prev_action)),
                     ctx.db_count ? std::to_string(*ctx.db_count) : "-");
}

void PrintTried(std::ostream& out, const char* title,
                const std::vector<std::pair<std::string, bool>>& tried,
                const std::optional<FireResult>& fired) {
  std::vector<std::string> parts;
  for (const auto& [id, fires] : tried) parts.push_back(fmt::format("{}:{}", id, fires ? "fires" : "no"));
  out << fmt::format("  {} rules tried: [{}]\n", title, fmt::join(parts, ", "));
  if (fired) {
    out << fmt::format("  {} selected: {} with {}\n", title, fired->rule_id,
                       FormatSubstitution(fired->substitution));
  } else {
    out << fmt::format("  {} selected: none\n", title);
  }
}

int Trace(const Options& o, std::ostream& out) {
  TrackerConfig config = ConfigFor(o);
  LoadedRun run = LoadRun(o, config);
  auto it = std::find_if(run.corpus.dialogues.begin(), run.corpus.dialogues.end(),
                         [&](const Dialogue& d) { return d.id == o.dialogue; });
  if (it == run.corpus.dialogues.end()) {
    throw Error(ErrorKind::kSchema, "dialogue '" + o.dialogue + "' not in corpus");
  }
  const RuleSet rules = FilterForMode(run.rules, config.apply_mode);
  for (const auto& warning : rules.warnings) out << "note: " << ToString(warning) << "\n";
  const TrackerInputs inputs{rules, run.db, run.ontology,
                             o.predictions.empty() ? nullptr : &run.predictions};
  out << fmt::format("dialogue {} ({})\n", it->id, Describe(config));
  PriorState prior;
  for (const auto& turn : it->turns) {
    StepTrace trace;
    const TurnOutcome outcome = Step(prior, it->id, turn, inputs, config, &trace);
    out << fmt::format("turn {}\n", turn.index);
    PrintContext(out, "belief", trace.belief_context);
    PrintTried(out, "belief", trace.belief_rules, trace.belief_fired);
    PrintContext(out, "action", trace.action_context);
    PrintTried(out, "action", trace.action_rules, trace.action_fired);
    out << fmt::format("  result: belief={} ({}) action={} ({})\n", ToString(outcome.belief),
                       ToString(outcome.belief_source), Join(outcome.action),
                       ToString(outcome.action_source));
    out << fmt::format("  gold:   belief={} action={}\n", ToString(turn.gold_belief),
                       Join(turn.gold_action));
    if (config.context_source == ContextSource::kOracle) {
      prior = {turn.gold_belief, turn.gold_action};
    } else {
      prior = {outcome.belief, outcome.action};
    }
  }
  return kExitOk;
}

int Agree(const Options& o, std::ostream& out) {
  const Ontology ontology = OntologyFor(o);
  const RuleSet a = LoadRules(o.agree_files.at(0), ontology);
  const RuleSet b = LoadRules(o.agree_files.at(1), ontology);
  const RuleKind kind = o.kind == "belief" ? RuleKind::kBelief : RuleKind::kAction;
  out << fmt::format("{:.6f}\n", Agreement(a.rules(kind), b.rules(kind)));
  return kExitOk;
}

int Sample(const Options& o, std::ostream& out) {
  const Ontology ontology = OntologyFor(o);
  const Corpus corpus = LoadCorpus(o.corpus, ontology);
  const Corpus sample = SampleCorpus(corpus, o.n, o.seed);
  WriteFile(o.out, SerializeCorpus(sample));
  out << fmt::format("sampled {} of {} dialogues\n", sample.dialogues.size(),
                     corpus.dialogues.size());
  return kExitOk;
}

int Gen(const Options& o, std::ostream& out) {
  const Ontology ontology = OntologyFor(o);
  const RestaurantDb db = LoadDb(o.db, ontology);
  const SyntheticData data = GenSynthetic(o.n, o.seed, db, ontology);
  WriteFile(o.out_corpus, SerializeCorpus(data.corpus));
  WriteFile(o.out_rules, data.rules_text);
  out << fmt::format("generated {} dialogues, {} oracle rules\n", data.corpus.dialogues.size(),
                     data.rules.size());
  return kExitOk;
}

int Compare(const Options& o, std::ostream& out) {
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& path : o.reports_a) a.push_back(LoadReport(path).Metric(o.metric));
  for (const auto& path : o.reports_b) b.push_back(LoadReport(path).Metric(o.metric));
  if (a.size() != b.size()) {
    throw CLI::ValidationError("--a/--b", fmt::format("need the same number of reports ({} vs {})",
                                                      a.size(), b.size()));
  }
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
  const MeanStd sa = Aggregate(a);
  const MeanStd sb = Aggregate(b);
  const SignTestResult test = SignTest(pairs);
  std::vector<std::string> levels;
  for (int level : test.significant_at) levels.push_back(std::to_string(level));
  out << fmt::format("metric: {}\n", o.metric);
  out << fmt::format("a: {:.6f} ± {:.6f} (n={})\n", sa.mean, sa.std, a.size());
  out << fmt::format("b: {:.6f} ± {:.6f} (n={})\n", sb.mean, sb.std, b.size());
  out << fmt::format("sign test a>b: wins={} losses={} ties={} p={:.6f} significant_at=[{}] {}\n",
                     test.wins, test.losses, test.ties, test.p_value, fmt::join(levels, ","),
                     SignificanceMarkers(test));
  return kExitOk;
}

}  // namespace

int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule-based dialogue state tracking toolkit", "clinn"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Ontology JSON (default: built-in restaurant)");
  };
  auto add_modes = [&](CLI::App* cmd) {
    cmd->add_option("--mode", o.mode, "Rule application mode")
        ->check(CLI::IsMember({"full", "free"}));
    cmd->add_option("--match", o.match, "Precondition match mode")
        ->check(CLI::IsMember({"subset", "exactset"}));
    cmd->add_option("--engine", o.engine, "base: rules only; hybrid: override predictions")
        ->check(CLI::IsMember({"base", "hybrid"}));
    cmd->add_option("--predictions", o.predictions, "Prediction JSON-lines file");
    cmd->add_option("--context", o.context, "Next-turn context source")
        ->check(CLI::IsMember({"tracked", "oracle"}));
  };

  auto* validate = app.add_subcommand("validate", "Parse and check a rule file");
  validate->add_option("--rules", o.rules, "Rule file")->required();
  add_config(validate);

  auto* replay = app.add_subcommand("replay", "Replay a corpus and write a report");
  replay->add_option("--rules", o.rules, "Rule file")->required();
  replay->add_option("--corpus", o.corpus, "Corpus JSON")->required();
  replay->add_option("--db", o.db, "Restaurant DB JSON")->required();
  replay->add_option("--out", o.out, "Report output path")->required();
  replay->add_option("--seed-label", o.seed_label, "Run label stored in the report");
  replay->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_modes(replay);
  add_config(replay);

  auto* trace = app.add_subcommand("trace", "Show rule matching turn by turn");
  trace->add_option("--rules", o.rules, "Rule file")->required();
  trace->add_option("--corpus", o.corpus, "Corpus JSON")->required();
  trace->add_option("--db", o.db, "Restaurant DB JSON")->required();
  trace->add_option("--dialogue", o.dialogue, "Dialogue id")->required();
  add_modes(trace);
  add_config(trace);

  auto* agree = app.add_subcommand("agree", "Inter-designer agreement of two rule files");
  agree->add_option("files", o.agree_files, "Two rule files")->required()->expected(2);
  agree->add_option("--kind", o.kind, "Rule list to compare")
      ->required()
      ->check(CLI::IsMember({"belief", "action"}));
  add_config(agree);

  auto* sample = app.add_subcommand("sample", "Seeded corpus subsample");
  sample->add_option("--corpus", o.corpus, "Corpus JSON")->required();
  sample->add_option("--n", o.n, "Dialogues to keep")->required();
  sample->add_option("--seed", o.seed, "Sampling seed")->required();
  sample->add_option("--out", o.out, "Output corpus path")->required();
  add_config(sample);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus and its oracle rules");
  gen->add_option("--n", o.n, "Dialogues")->required();
  gen->add_option("--seed", o.seed, "Generator seed")->required();
  gen->add_option("--db", o.db, "Restaurant DB JSON")->required();
  gen->add_option("--out-corpus", o.out_corpus, "Corpus output path")->required();
  gen->add_option("--out-rules", o.out_rules, "Rule file output path")->required();
  add_config(gen);

  auto* compare = app.add_subcommand("compare", "Seed-paired comparison of two report groups");
  compare->add_option("--a", o.reports_a, "Reports of system A")->required();
  compare->add_option("--b", o.reports_b, "Reports of system B")->required();
  compare->add_option("--metric", o.metric, "Metric to compare")
      ->required()
      ->check(CLI::IsMember({"action_f1", "joint_goal", "slot_acc", "slot_f1"}));
  add_config(compare);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*validate) return Validate(o, out);
    if (*replay) return Replay(o, out);
    if (*trace) return Trace(o, out);
    if (*agree) return Agree(o, out);
    if (*sample) return Sample(o, out);
    if (*gen) return Gen(o, out);
    if (*compare) return Compare(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << ErrorKindName(e.kind()) << ": " << e.what() << "\n";
    return ExitFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace clinn
