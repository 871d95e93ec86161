#include "qrna/cli.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qrna/dataset.hpp"
#include "qrna/errors.hpp"
#include "qrna/pipeline.hpp"
#include "qrna/qubo.hpp"
#include "qrna/scoring.hpp"
#include "qrna/solvers.hpp"
#include "qrna/stems.hpp"
#include "qrna/trainer.hpp"

namespace qrna {

namespace {

struct CommonOptions {
  std::string data_dir;
  int model = 3;
  int min_stem = 2;
  int min_loop = 3;
  std::string params_file;
  std::string params_preset;
  std::vector<std::string> param_overrides;

  std::string solver = "exhaustive";
  uint64_t seed = 1;
  int budget = 20000;
  int reads = 8;
  int tenure = 0;
  int exhaustive_cap = 25;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

std::filesystem::path data_dir(const CommonOptions& opt) {
  return opt.data_dir.empty() ? default_data_dir() : std::filesystem::path(opt.data_dir);
}

SolveRequest solve_request(const CommonOptions& opt) {
  SolveRequest req;
  if (opt.solver == "exhaustive") {
    req.method = SolveMethod::Exhaustive;
  } else if (opt.solver == "sa") {
    req.method = SolveMethod::SimAnneal;
  } else if (opt.solver == "tabu") {
    req.method = SolveMethod::Tabu;
  } else {
    throw DomainError("solver must be exhaustive, sa or tabu");
  }
  req.seed = opt.seed;
  req.budget = opt.budget;
  req.restarts = opt.reads;
  req.tenure = opt.tenure;
  req.exhaustive_cap = opt.exhaustive_cap;
  return req;
}

void apply_kv(Model1Params& p, const std::map<std::string, double>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "model") continue;
    else if (key == "length_weight") p.length_weight = value;
    else if (key == "bp_reward") p.bp_reward = value;
    else if (key == "pk_discount") p.pk_discount = value;
    else if (key == "overlap_penalty") p.overlap_penalty = value;
    else throw DomainError("unknown model-1 parameter '" + key + "'");
  }
}

void apply_kv(Model2Params& p, const std::map<std::string, double>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "model") continue;
    else if (key == "stack_reward") p.stack_reward = value;
    else if (key == "pk_penalty") p.pk_penalty = value;
    else if (key == "overlap_penalty") p.overlap_penalty = value;
    else throw DomainError("unknown model-2 parameter '" + key + "'");
  }
}

void apply_kv(Model3Params& p, const std::map<std::string, double>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "model") continue;
    else if (key == "uniformity_weight") p.uniformity_weight = value;
    else if (key == "stability_weight") p.stability_weight = value;
    else if (key == "pk_loop_weight") p.pk_loop_weight = value;
    else if (key == "pk_stem_weight") p.pk_stem_weight = value;
    else if (key == "nt_length_scale") p.nt_length_scale = value;
    else if (key == "overlap_penalty") p.overlap_penalty = value;
    else throw DomainError("unknown model-3 parameter '" + key + "'");
  }
}

// defaults (paper-2022 values) -> preset -> file -> inline key=value overrides
PipelineConfig pipeline_config(const CommonOptions& opt) {
  PipelineConfig cfg;
  cfg.model = opt.model;
  cfg.min_stem = opt.min_stem;
  cfg.min_loop = opt.min_loop;

  if (!opt.params_preset.empty()) {
    if (opt.params_preset == "ones") {
      cfg.m1 = ones_model1();
      cfg.m2 = ones_model2();
      cfg.m3 = ones_model3();
    } else if (opt.params_preset != "paper-2022") {
      throw DomainError("unknown preset '" + opt.params_preset + "' (try paper-2022 or ones)");
    }
  }

  std::map<std::string, double> kv;
  if (!opt.params_file.empty()) {
    kv = parse_params_file(read_file(opt.params_file));
    if (auto it = kv.find("model"); it != kv.end() && static_cast<int>(it->second) != opt.model)
      throw DomainError("parameter file is for model " +
                        std::to_string(static_cast<int>(it->second)));
  }
  for (const std::string& override_text : opt.param_overrides) {
    const auto eq = override_text.find('=');
    if (eq == std::string::npos) throw DomainError("--set expects KEY=VALUE");
    kv[override_text.substr(0, eq)] = std::stod(override_text.substr(eq + 1));
  }
  if (!kv.empty()) {
    switch (opt.model) {
      case 1: apply_kv(cfg.m1, kv); break;
      case 2: apply_kv(cfg.m2, kv); break;
      case 3: apply_kv(cfg.m3, kv); break;
      default: throw DomainError("model must be 1, 2 or 3");
    }
  }
  if (opt.model == 2 && cfg.m2.pk_penalty >= cfg.m2.stack_reward)
    std::cerr << "warning: pk_penalty >= stack_reward weakens the soft pseudoknot constraint\n";
  return cfg;
}

int cmd_enumerate(const CommonOptions& opt, const std::string& seq_path) {
  const RnaSequence seq = parse_fasta(seq_path);
  const NnTable nn = NnTable::load_file(data_dir(opt) / "nn_stack_37.tsv");
  PipelineConfig cfg = pipeline_config(opt);
  CandidateSet set = enumerate_for_model(seq, cfg, nn);
  std::cout << serialize_candidates(set);
  return 0;
}

int cmd_build(const CommonOptions& opt, const std::string& seq_path,
              const std::string& candidates_path, const std::string& out_path) {
  const NnTable nn = NnTable::load_file(data_dir(opt) / "nn_stack_37.tsv");
  const LoopPenaltyTable loops = LoopPenaltyTable::load_file(data_dir(opt) / "loop_penalties.tsv");
  PipelineConfig cfg = pipeline_config(opt);

  CandidateSet set;
  if (!candidates_path.empty()) {
    set = parse_candidates(read_file(candidates_path));
  } else {
    if (seq_path.empty()) throw DomainError("build needs a sequence file or --candidates");
    set = enumerate_for_model(parse_fasta(seq_path), cfg, nn);
  }
  const Qubo qubo = build_for_model(set, cfg, loops);
  const std::string doc = qubo_to_json(qubo, &set);
  if (out_path.empty())
    std::cout << doc;
  else
    write_file(out_path, doc);
  return 0;
}

int cmd_solve(const CommonOptions& opt, const std::string& qubo_path) {
  const Qubo qubo = qubo_from_json(read_file(qubo_path));
  const SolveResult result = solve(qubo, solve_request(opt));
  std::cout << result_to_json(result);
  return 0;
}

void write_prediction(const CommonOptions& opt, const RnaSequence& seq, const Prediction& p,
                      const std::string& out_path, const std::string& report_path) {
  const std::string ct = emit_ct(seq, p.structure);
  if (out_path.empty())
    std::cout << ct;
  else
    write_file(out_path, ct);

  std::ostringstream report;
  report << "# id " << seq.id << " model " << opt.model << " energy " << p.solve.best_energy
         << " candidates " << p.set.candidates.size() << "\n";
  for (size_t i = 0; i < p.set.candidates.size(); ++i) {
    const Candidate& c = p.set.candidates[i];
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu\t%d\t%d\t%d\t%.12g\t%d\n", i, c.first, c.last, c.length,
                  c.weight, p.solve.best_q[i] ? 1 : 0);
    report << buf;
  }
  if (report_path.empty())
    std::cerr << "id " << seq.id << " energy " << p.solve.best_energy << " selected "
              << std::count(p.solve.best_q.begin(), p.solve.best_q.end(), uint8_t{1}) << "/"
              << p.set.candidates.size() << "\n";
  else
    write_file(report_path, report.str());
}

int cmd_predict(const CommonOptions& opt, const std::string& seq_path,
                const std::string& manifest_path, const std::string& out_path,
                const std::string& report_path, const std::string& out_dir, int jobs) {
  const NnTable nn = NnTable::load_file(data_dir(opt) / "nn_stack_37.tsv");
  const LoopPenaltyTable loops = LoopPenaltyTable::load_file(data_dir(opt) / "loop_penalties.tsv");
  const PipelineConfig cfg = pipeline_config(opt);
  const SolveRequest req = solve_request(opt);

  if (manifest_path.empty()) {
    if (seq_path.empty()) throw DomainError("predict needs a sequence file or --manifest");
    const RnaSequence seq = parse_fasta(seq_path);
    const Prediction p = predict(seq, cfg, nn, loops, req);
    write_prediction(opt, seq, p, out_path, report_path);
    return 0;
  }

  const DatasetManifest manifest = load_manifest(manifest_path);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<std::string> rows(manifest.entries.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (size_t idx = next.fetch_add(1); idx < manifest.entries.size();
         idx = next.fetch_add(1)) {
      const ManifestEntry& entry = manifest.entries[idx];
      try {
        const RnaSequence seq = parse_fasta(entry.sequence_path);
        const auto [ct_seq, truth] = parse_ct(read_file(entry.ct_path.string()));
        SolveRequest entry_req = req;
        entry_req.seed = substream_seed(req.seed, idx);
        const Prediction p = predict(seq, cfg, nn, loops, entry_req);
        rows[idx] = score_row(entry.id, opt.model, entry.pseudoknotted,
                              confusion(p.structure, truth));
        if (!out_dir.empty())
          write_file((std::filesystem::path(out_dir) / (entry.id + ".ct")).string(),
                     emit_ct(seq, p.structure));
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "warning: '" << entry.id << "' failed: " << e.what() << "\n";
        rows[idx] = entry.id + "\t" + std::to_string(opt.model) + "\terror\t-\t-\t-\t-\t-";
      }
    }
  };

  const int thread_count = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < thread_count; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::cout << score_header() << "\n";
  for (const std::string& row : rows) std::cout << row << "\n";
  return 0;
}

int cmd_score(const std::string& pred_path, const std::string& truth_path) {
  const auto [pred_seq, pred] = parse_ct(read_file(pred_path));
  const auto [truth_seq, truth] = parse_ct(read_file(truth_path));
  const Confusion c = confusion(pred, truth);
  std::cout << score_header() << "\n"
            << score_row(pred_seq.id, 0, is_pseudoknotted(truth), c) << "\n";
  return 0;
}

int cmd_train(const CommonOptions& opt, const std::string& manifest_path,
              const std::string& structure_class, const std::string& split,
              const std::string& loss_name, int iterations, const std::string& out_params,
              const std::string& out_log) {
  const NnTable nn = NnTable::load_file(data_dir(opt) / "nn_stack_37.tsv");
  const LoopPenaltyTable loops = LoopPenaltyTable::load_file(data_dir(opt) / "loop_penalties.tsv");
  const DatasetManifest manifest = load_manifest(manifest_path);

  std::vector<TrainItem> items;
  for (const ManifestEntry& entry : manifest.entries) {
    if (split == "train" && entry.split != ManifestEntry::Split::Train) continue;
    if (split == "test" && entry.split != ManifestEntry::Split::Test) continue;
    if (structure_class == "pk" && !entry.pseudoknotted) continue;
    if (structure_class == "nopk" && entry.pseudoknotted) continue;
    TrainItem item;
    item.id = entry.id;
    item.seq = parse_fasta(entry.sequence_path);
    item.truth = parse_ct(read_file(entry.ct_path.string())).second;
    items.push_back(std::move(item));
  }
  if (items.empty()) throw DomainError("no manifest entries match the requested class/split");

  SpsaConfig cfg;
  cfg.iterations = iterations;
  cfg.seed = opt.seed;
  if (loss_name == "mean") {
    cfg.loss_kind = LossKind::OneMinusMeanMcc;
  } else if (loss_name == "squared") {
    cfg.loss_kind = LossKind::MeanSquaredComplement;
  } else {
    throw DomainError("loss must be mean or squared");
  }

  const PipelineConfig base = pipeline_config(opt);
  const TrainRecord record =
      train(opt.model, items, cfg, base, nn, loops, solve_request(opt));

  const std::string log = serialize_train_log(record, model_param_names(opt.model));
  if (out_log.empty())
    std::cout << log;
  else
    write_file(out_log, log);

  const std::string params = serialize_params_file(opt.model, record.best_params);
  if (!out_params.empty()) write_file(out_params, params);
  std::cerr << "trained model " << opt.model << " over " << items.size() << " structures; best loss "
            << record.best_loss << "\n";
  return 0;
}

int cmd_complexity(int n_min, int n_max, int m_min, int m_max) {
  if (n_min % 2 == 0 || n_max % 2 == 0)
    throw DomainError("the closed forms require odd sequence lengths");
  const PairRule rule = PairRule::standard();
  std::cout << "n\tm\ts_closed\ts_brute\tp_closed\tp_brute\tmatch\n";
  bool all_match = true;
  for (int n = n_min; n <= n_max; n += 2) {
    for (int m = m_min; m <= m_max; ++m) {
      if (n < 2 * m + 1) continue;
      const RnaSequence seq = worst_case_sequence(n);
      const CandidateSet set = enumerate_stems(seq, rule, m, 0, WeightMode::BpLength);
      const int64_t s_brute = static_cast<int64_t>(set.candidates.size());
      int64_t p_brute = 0;
      for (int64_t i = 0; i < s_brute; ++i) p_brute += i;  // count unordered pairs
      const int64_t s_closed = stem_count_closed_form(n, m);
      const int64_t p_closed = pair_count_closed_form(n, m);
      const bool match = s_brute == s_closed && p_brute == p_closed;
      all_match = all_match && match;
      std::cout << n << "\t" << m << "\t" << s_closed << "\t" << s_brute << "\t" << p_closed
                << "\t" << p_brute << "\t" << (match ? "ok" : "MISMATCH") << "\n";
    }
  }
  return all_match ? 0 : 1;
}

int cmd_dataset_stats(const std::string& manifest_path) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  std::cout << "id\tsplit\tpseudoknotted\tcomputed_pk\tlength\tpairs\tknown_stems\tmu\n";
  for (const ManifestEntry& entry : manifest.entries) {
    const auto [seq, truth] = parse_ct(read_file(entry.ct_path.string()));
    const auto [stems, mu] = known_stems(truth, 2, WeightMode::BpLength);
    std::cout << entry.id << "\t"
              << (entry.split == ManifestEntry::Split::Train ? "train" : "test") << "\t"
              << (entry.pseudoknotted ? "true" : "false") << "\t"
              << (is_pseudoknotted(truth) ? "true" : "false") << "\t" << seq.size() << "\t"
              << truth.pairs.size() << "\t" << stems.size() << "\t" << mu << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"QUBO models for RNA secondary structure prediction"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string seq_path, manifest_path, candidates_path, qubo_path, out_path, report_path, out_dir;
  std::string pred_path, truth_path;
  std::string structure_class = "all", split = "train", loss_name = "mean";
  std::string out_params, out_log;
  int iterations = 60;
  int jobs = 1;
  int n_min = 5, n_max = 41, m_min = 2, m_max = 4;

  auto add_common = [&](CLI::App* cmd, bool with_solver) {
    cmd->add_option("--data-dir", opt.data_dir, "directory with the thermodynamic tables");
    cmd->add_option("--model", opt.model, "QUBO model (1, 2 or 3)")->check(CLI::Range(1, 3));
    cmd->add_option("--stem-min", opt.min_stem, "minimum stem length in base pairs");
    cmd->add_option("--min-loop", opt.min_loop, "minimum hairpin loop size");
    cmd->add_option("--params", opt.params_file, "parameter file (KEY<TAB>VALUE)");
    cmd->add_option("--params-preset", opt.params_preset, "named preset: paper-2022 or ones");
    cmd->add_option("--set", opt.param_overrides, "inline parameter override KEY=VALUE");
    if (with_solver) {
      cmd->add_option("--solver", opt.solver, "exhaustive, sa or tabu");
      cmd->add_option("--seed", opt.seed, "random seed");
      cmd->add_option("--budget", opt.budget, "sweeps (sa) or moves (tabu) per read");
      cmd->add_option("--reads", opt.reads, "independent restarts");
      cmd->add_option("--tenure", opt.tenure, "tabu tenure (0 = auto)");
      cmd->add_option("--exhaustive-cap", opt.exhaustive_cap, "max variables for exhaustive");
    }
  };

  CLI::App* enumerate_cmd = app.add_subcommand("enumerate", "list candidate stems and relations");
  enumerate_cmd->add_option("sequence", seq_path, "FASTA or bare sequence file")->required();
  add_common(enumerate_cmd, false);

  CLI::App* build_cmd = app.add_subcommand("build", "construct the QUBO for a sequence");
  build_cmd->add_option("sequence", seq_path, "FASTA or bare sequence file");
  build_cmd->add_option("--candidates", candidates_path, "use a serialized candidate set instead");
  build_cmd->add_option("--out", out_path, "QUBO JSON output path (default stdout)");
  add_common(build_cmd, false);

  CLI::App* solve_cmd = app.add_subcommand("solve", "minimize a QUBO interchange file");
  solve_cmd->add_option("qubo", qubo_path, "QUBO JSON document")->required();
  add_common(solve_cmd, true);

  CLI::App* predict_cmd = app.add_subcommand("predict", "fold a sequence end to end");
  predict_cmd->add_option("sequence", seq_path, "FASTA or bare sequence file");
  predict_cmd->add_option("--manifest", manifest_path, "score every manifest entry instead");
  predict_cmd->add_option("--out", out_path, "CT output path (default stdout)");
  predict_cmd->add_option("--report", report_path, "per-candidate selection report path");
  predict_cmd->add_option("--out-dir", out_dir, "directory for per-entry CTs (manifest mode)");
  predict_cmd->add_option("--jobs", jobs, "parallel entries in manifest mode");
  add_common(predict_cmd, true);

  CLI::App* score_cmd = app.add_subcommand("score", "compare predicted and known CT files");
  score_cmd->add_option("prediction", pred_path, "predicted CT")->required();
  score_cmd->add_option("truth", truth_path, "known CT")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "fit model parameters with SPSA");
  train_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
  train_cmd->add_option("--iterations", iterations, "SPSA iterations");
  train_cmd->add_option("--class", structure_class, "structure class: all, pk or nopk");
  train_cmd->add_option("--split", split, "manifest split: train, test or all");
  train_cmd->add_option("--loss", loss_name, "loss: mean (1 - mean MCC) or squared");
  train_cmd->add_option("--out-params", out_params, "write the best parameters here");
  train_cmd->add_option("--out-log", out_log, "write the progress log here (default stdout)");
  add_common(train_cmd, true);

  CLI::App* complexity_cmd =
      app.add_subcommand("complexity", "verify the worst-case candidate counting formulas");
  complexity_cmd->add_option("--n-min", n_min, "smallest (odd) sequence length");
  complexity_cmd->add_option("--n-max", n_max, "largest (odd) sequence length");
  complexity_cmd->add_option("--m-min", m_min, "smallest minimum stem length");
  complexity_cmd->add_option("--m-max", m_max, "largest minimum stem length");

  CLI::App* stats_cmd = app.add_subcommand("dataset-stats", "summarize a dataset manifest");
  stats_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (enumerate_cmd->parsed()) return cmd_enumerate(opt, seq_path);
    if (build_cmd->parsed()) return cmd_build(opt, seq_path, candidates_path, out_path);
    if (solve_cmd->parsed()) return cmd_solve(opt, qubo_path);
    if (predict_cmd->parsed())
      return cmd_predict(opt, seq_path, manifest_path, out_path, report_path, out_dir, jobs);
    if (score_cmd->parsed()) return cmd_score(pred_path, truth_path);
    if (train_cmd->parsed())
      return cmd_train(opt, manifest_path, structure_class, split, loss_name, iterations,
                       out_params, out_log);
    if (complexity_cmd->parsed()) return cmd_complexity(n_min, n_max, m_min, m_max);
    if (stats_cmd->parsed()) return cmd_dataset_stats(manifest_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace qrna
