#include "mtlw/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtlw/errors.hpp"
#include "mtlw/experiment_config.hpp"
#include "mtlw/net/checkpoint.hpp"
#include "mtlw/train/grid_search.hpp"

namespace mtlw::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExperimentConfig resolve_config(const CommandOptions& opts, const char* out_key) {
  json doc = read_config_document(opts.config);
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.out) doc[out_key] = opts.out->string();
  return config_from_json(doc);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

data::Dataset load_experiment_data(const ExperimentConfig& cfg) {
  const fs::path manifest = cfg.manifest_path();
  if (!fs::exists(manifest)) throw IoError("dataset manifest not found: " + manifest.string() + " (run gen-data)");
  return data::load_dataset(manifest);
}

json report_json(const metrics::MetricsReport& r) { return metrics::to_json(r); }

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StructuralError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const LoadError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const train::NumericalAbort& e) {
    err << "numerical abort in epoch " << e.epoch() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int cmd_gen_data(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts, "data_dir");
    ensure_dir(cfg.data_dir);
    const data::DatasetManifest manifest = data::generate_synthetic(cfg.generator, cfg.data_dir);
    write_config(cfg.data_dir / "config.json", cfg);

    std::size_t counts[3] = {0, 0, 0};
    for (const data::ManifestEntry& e : manifest.entries) ++counts[static_cast<int>(e.split)];
    out << "manifest: " << cfg.manifest_path().string() << '\n';
    for (data::Split s : {data::Split::kTrain, data::Split::kVal, data::Split::kTest}) {
      out << data::split_name(s) << ": " << counts[static_cast<int>(s)] << '\n';
    }
    return kExitOk;
  });
}

int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts, "out_dir");
    const data::Dataset dataset = load_experiment_data(cfg);
    net::MultiExitNet model(cfg.net_for(dataset.height()), cfg.seed);
    ensure_dir(cfg.out_dir);
    write_config(cfg.out_dir / "config.json", cfg);

    json summary = {{"strategy", std::string(weighting::strategy_name(cfg.train.weighting.strategy))},
                    {"seed", cfg.seed},
                    {"exits", cfg.net.exits.to_string()}};
    if (cfg.train.single_task) summary["single_task"] = std::string(train::task_name(*cfg.train.single_task));

    train::TrainResult result;
    try {
      result = train::train(model, dataset, cfg.train, [&](const train::EpochRecord& r) {
        err << "epoch " << r.epoch << "/" << cfg.train.epochs << " loss " << fixed(r.total_loss, 5) << " val h_mean "
            << fixed(r.val.h_mean, 4) << '\n';
      });
    } catch (const train::NumericalAbort& e) {
      train::write_log_csv(cfg.out_dir / "training_log.csv", e.log());
      summary["status"] = "nan_abort";
      summary["abort_epoch"] = e.epoch();
      write_text(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
      throw;
    }

    model.restore(result.best_parameters);
    net::save_checkpoint(cfg.out_dir / "checkpoint.menc", model);
    train::write_log_csv(cfg.out_dir / "training_log.csv", result.log);

    const metrics::MetricsReport final_val = result.log.records.back().val;
    summary["status"] = "ok";
    summary["epochs"] = result.log.records.size();
    summary["best_epoch"] = result.best_epoch;
    summary["best_val"] = report_json(result.best_val);
    summary["final_val"] = report_json(final_val);
    summary["test"] = report_json(
        train::evaluate(model, dataset, data::Split::kTest, cfg.train, result.age_standardization));
    summary["final_alphas"] = result.final_alphas;
    summary["age_standardization"] = {{"mean", result.age_standardization.mean},
                                      {"std", result.age_standardization.std}};
    write_text(cfg.out_dir / "summary.json", summary.dump(2) + "\n");

    out << report_json(final_val).dump() << '\n';
    return kExitOk;
  });
}

int cmd_grid_search(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts, "out_dir");
    const data::Dataset dataset = load_experiment_data(cfg);
    const net::NetConfig base = cfg.net_for(dataset.height());
    ensure_dir(cfg.out_dir);
    write_config(cfg.out_dir / "config.json", cfg);

    const auto candidates = train::all_assignments(opts.ordered_only);
    const train::GridSearchResult result = train::grid_search_exits(
        dataset, base, cfg.train, candidates, [&](const train::GridTrial& t, std::size_t i, std::size_t n) {
          err << "trial " << (i + 1) << "/" << n << " exits " << t.exits.to_string() << " ";
          if (t.ok()) {
            err << "h_mean " << fixed(t.val.h_mean, 4) << '\n';
          } else {
            err << t.status << '\n';
          }
        });

    std::ostringstream csv;
    csv << kGridCsvHeader << '\n';
    for (const train::GridTrial& t : result.ranking) {
      csv << t.exits.age_exit << ',' << t.exits.country_exit << ',' << t.exits.emotion_exit;
      if (t.ok()) {
        csv << ',' << json(t.val.emo_ccc).dump() << ',' << json(t.val.cou_uar).dump() << ','
            << json(t.val.age_mae).dump() << ',' << json(t.val.h_mean).dump() << ",ok\n";
      } else {
        std::string reason = t.status;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        csv << ",,,,," << reason << '\n';
      }
    }
    write_text(cfg.out_dir / "grid_search.csv", csv.str());

    if (!result.best) {
      err << "every trial failed\n";
      return kExitFailure;
    }
    const train::GridTrial& best = result.ranking.front();
    out << json{{"best_exits", best.exits.to_string()}, {"val", report_json(best.val)}}.dump() << '\n';
    return kExitOk;
  });
}

int cmd_evaluate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = resolve_config(opts, "out_dir");
    const auto split = data::parse_split(opts.split);
    if (!split) throw ConfigError("split", "expected train|val|test");
    const data::Dataset dataset = load_experiment_data(cfg);
    const fs::path ckpt = cfg.out_dir / "checkpoint.menc";
    if (!fs::exists(ckpt)) throw IoError("checkpoint not found: " + ckpt.string() + " (run train)");
    const net::MultiExitNet model = net::load_checkpoint(ckpt);
    const auto age_std = train::AgeStandardization::from_dataset(dataset);
    const metrics::MetricsReport report = train::evaluate(model, dataset, *split, cfg.train, age_std);
    write_text(cfg.out_dir / ("eval_" + opts.split + ".json"), report_json(report).dump(2) + "\n");
    out << report_json(report).dump() << '\n';
    return kExitOk;
  });
}

int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    struct Row {
      std::string run, strategy, status;
      metrics::MetricsReport val;
      bool best = false;
    };
    std::vector<Row> rows;
    for (const fs::path& dir : opts.run_dirs) {
      Row row;
      row.run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
      row.status = "missing";
      std::ifstream in(dir / "summary.json");
      if (in) {
        try {
          const json s = json::parse(in);
          row.strategy = s.value("strategy", "");
          if (s.value("status", "") != "ok") {
            row.status = s.value("status", "missing");
          } else {
            row.val = metrics::report_from_json(s.at("best_val"));
            const double h = metrics::report_hmean(row.val.emo_ccc, row.val.cou_uar, row.val.age_mae);
            row.status = std::abs(h - row.val.h_mean) <= 1e-9 ? "ok" : "inconsistent";
          }
        } catch (const std::exception& e) {
          err << "warning: " << (dir / "summary.json").string() << ": " << e.what() << '\n';
          row.status = "missing";
        }
      }
      rows.push_back(row);
    }

    Row* best = nullptr;
    for (Row& r : rows) {
      if (r.status == "ok" && (!best || r.val.h_mean > best->val.h_mean)) best = &r;
    }
    if (best) best->best = true;

    std::ostringstream csv;
    csv << "run,strategy,emo_ccc,cou_uar,age_mae,h_mean,best,status\n";
    for (const Row& r : rows) {
      csv << r.run << ',' << r.strategy << ',';
      if (r.status == "ok") {
        csv << json(r.val.emo_ccc).dump() << ',' << json(r.val.cou_uar).dump() << ',' << json(r.val.age_mae).dump()
            << ',' << json(r.val.h_mean).dump();
      } else {
        csv << ",,,";
      }
      csv << ',' << (r.best ? 1 : 0) << ',' << r.status << '\n';
    }

    std::size_t run_w = 3, strat_w = 8;
    for (const Row& r : rows) {
      run_w = std::max(run_w, r.run.size());
      strat_w = std::max(strat_w, r.strategy.size());
    }
    std::ostringstream txt;
    txt << std::left << std::setw(static_cast<int>(run_w)) << "Run" << "  " << std::setw(static_cast<int>(strat_w))
        << "Strategy" << "  " << std::right << std::setw(8) << "Emo-CCC" << "  " << std::setw(8) << "Cou-UAR" << "  "
        << std::setw(8) << "Age-MAE" << "  " << std::setw(8) << "H-Mean" << '\n';
    for (const Row& r : rows) {
      txt << std::left << std::setw(static_cast<int>(run_w)) << r.run << "  " << std::setw(static_cast<int>(strat_w))
          << r.strategy << "  " << std::right;
      if (r.status == "ok") {
        txt << std::setw(8) << fixed(r.val.emo_ccc, 3) << "  " << std::setw(8) << fixed(r.val.cou_uar, 3) << "  "
            << std::setw(8) << fixed(r.val.age_mae, 3) << "  " << std::setw(8) << fixed(r.val.h_mean, 3)
            << (r.best ? "  *" : "");
      } else {
        txt << r.status;
      }
      txt << '\n';
    }

    if (opts.out) {
      ensure_dir(*opts.out);
      write_text(*opts.out / "report.csv", csv.str());
      write_text(*opts.out / "report.txt", txt.str());
    }
    out << txt.str();
    return kExitOk;
  });
}

}  // namespace mtlw::tools
