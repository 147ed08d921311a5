#include "io/runner.hpp"

#include <filesystem>

#include "fsr/metrics.hpp"
#include "fsr/offline.hpp"
#include "fsr/simulation.hpp"
#include "fsr/spline.hpp"
#include "fsr/version.hpp"
#include "io/csv.hpp"
#include "io/parallel.hpp"
#include "io/report.hpp"
#include "io/snapshot.hpp"

namespace fsr::io {

namespace {

std::string out_path(const RunConfig& config, const char* name) {
  std::filesystem::create_directories(config.out);
  return (std::filesystem::path(config.out) / name).string();
}

/// Replication r draws its data from a seed derived from the master seed, so
/// the set of replications is a pure function of (config, R) no matter how
/// they are scheduled onto threads.
std::uint64_t replication_seed(const RunConfig& config, std::uint64_t r) {
  return derive_stream_seed(config.seed, StreamDomain::dataset, r);
}

nlohmann::json to_json(const Vectord& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json summaries_to_json(const std::vector<Vectord>& per_rep) {
  const Eigen::Index d = per_rep.empty() ? 0 : per_rep.front().size();
  Vectord mean(d), sd(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> column;
    column.reserve(per_rep.size());
    for (const Vectord& v : per_rep) column.push_back(v[j]);
    const auto s = summarize(column);
    mean[j] = s.mean;
    sd[j] = s.sd;
  }
  return {{"mean", to_json(mean)}, {"sd", to_json(sd)}};
}

const char* method_name(BandMethod method) {
  return method == BandMethod::percentile ? "percentile" : "variance";
}

}  // namespace

nlohmann::json run(const RunConfig& config) {
  switch (config.mode) {
    case Mode::simulate: return run_simulate(config);
    case Mode::fit: return run_fit(config);
    case Mode::infer: return run_infer(config);
    case Mode::benchmark: return run_benchmark(config);
  }
  throw Error("run: unreachable mode");
}

nlohmann::json run_simulate(const RunConfig& config) {
  config.validate();
  const std::uint64_t R = config.replications;
  const bool with_bands = config.inference.enabled && config.inference.chains >= 2;
  const Eigen::Index d = kDgpCovariates;

  struct Rep {
    Vectord rmise_values;
    std::vector<ConfidenceBandd> bands;  // per level: percentile, variance
  };
  std::vector<Rep> reps(R);

  ThreadPool pool(config.threads);
  pool.run(static_cast<Eigen::Index>(R), [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index r = begin; r < end; ++r) {
      DgpConfig dgp = config.dgp;
      dgp.seed = replication_seed(config, static_cast<std::uint64_t>(r));
      DgpStream<double> stream(dgp);
      const CoefficientFieldd truth = stream.beta();
      Rep& rep = reps[static_cast<std::size_t>(r)];
      if (with_bands) {
        InferenceEngined engine(d, stream.grid(), config.inference.chains,
                                dgp.seed, config.schedule, config.inference.burn_in);
        while (const FunctionalSampled* sample = stream()) engine.observe(*sample);
        rep.rmise_values = rmise(engine.gm().average, truth);
        for (double tau : config.inference.levels) {
          rep.bands.push_back(engine.percentile_band(tau));
          rep.bands.push_back(engine.variance_band(tau));
        }
      } else {
        GmState<double> state =
            GmState<double>::zero(d, stream.grid(), config.schedule);
        while (const FunctionalSampled* sample = stream()) observe(state, *sample);
        rep.rmise_values = rmise(state.average, truth);
      }
    }
  });

  // Aggregation runs serially in replication order: deterministic bytes.
  const Gridd grid = grid_uniform(config.dgp.m);
  const CoefficientFieldd truth = true_beta(grid, config.dgp.beta3);
  std::vector<Vectord> rmise_per_rep;
  rmise_per_rep.reserve(R);
  for (const Rep& rep : reps) rmise_per_rep.push_back(rep.rmise_values);

  nlohmann::json results;
  results["n"] = config.dgp.n;
  results["replications"] = R;
  results["rmise"] = summaries_to_json(rmise_per_rep);
  {
    // Mean error rescaled by sqrt(n): constant across n at the root-n rate.
    Vectord scaled(d);
    for (Eigen::Index j = 0; j < d; ++j)
      scaled[j] = std::sqrt(double(config.dgp.n)) *
                  results["rmise"]["mean"][static_cast<std::size_t>(j)].get<double>();
    results["rmise"]["sqrt_n_mean"] = to_json(scaled);
  }

  if (with_bands) {
    nlohmann::json coverage = nlohmann::json::array();
    const std::size_t levels = config.inference.levels.size();
    for (std::size_t li = 0; li < levels; ++li) {
      for (int k = 0; k < 2; ++k) {
        CoverageAccumulator<double> acc(d, grid.size());
        for (const Rep& rep : reps) acc.add(rep.bands[2 * li + k], truth);
        const Matrixd rates = acc.rates();
        nlohmann::json cells = nlohmann::json::array();
        for (Eigen::Index j = 0; j < d; ++j) {
          nlohmann::json row = nlohmann::json::array();
          for (Eigen::Index l = 0; l < grid.size(); ++l) row.push_back(rates(j, l));
          cells.push_back(std::move(row));
        }
        coverage.push_back(
            {{"level", 1.0 - config.inference.levels[li]},
             {"method", method_name(k == 0 ? BandMethod::percentile
                                           : BandMethod::variance)},
             {"mean", to_json(acc.mean_rates())},
             {"cells", std::move(cells)}});
      }
    }
    results["coverage"] = std::move(coverage);
  }

  // Per-replication table for distribution plots.
  {
    std::ofstream csv(out_path(config, "replications.csv"));
    if (!csv) throw Error("run: cannot write replications.csv");
    csv << "rep";
    for (Eigen::Index j = 0; j < d; ++j) csv << ",rmise" << (j + 1);
    if (with_bands)
      for (double tau : config.inference.levels)
        for (int k = 0; k < 2; ++k)
          csv << ",covered" << static_cast<int>(std::lround(100.0 * (1.0 - tau)))
              << "_" << (k == 0 ? "percentile" : "variance");
    csv << "\n";
    for (std::uint64_t r = 0; r < R; ++r) {
      const Rep& rep = reps[r];
      csv << r;
      for (Eigen::Index j = 0; j < d; ++j)
        csv << "," << format_double(rep.rmise_values[j]);
      if (with_bands)
        for (std::size_t bi = 0; bi < rep.bands.size(); ++bi) {
          const ConfidenceBandd& band = rep.bands[bi];
          Eigen::Index hits = 0;
          for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index l = 0; l < grid.size(); ++l)
              if (band.lower(j, l) <= truth.values(j, l) &&
                  truth.values(j, l) <= band.upper(j, l))
                ++hits;
          csv << ","
              << format_double(double(hits) / double(d * grid.size()));
        }
      csv << "\n";
    }
  }

  const nlohmann::json report = make_report(config, 0, std::move(results));
  write_report(out_path(config, "report.json"), report);
  return report;
}

nlohmann::json run_fit(const RunConfig& config) {
  config.validate();
  CsvStream stream(config.input.path, config.input);
  const Eigen::Index d = stream.covariate_count();
  const Gridd grid = stream.grid();
  const bool with_bands = config.inference.enabled && config.inference.chains >= 2;

  InferenceEngined engine(d, grid, with_bands ? config.inference.chains : 0,
                          config.seed, config.schedule, config.inference.burn_in);
  ThreadPool pool(config.threads);
  PoolExecutor executor(pool);

  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t next_snapshot = config.fit.trajectory_stride == 0
                                    ? 1
                                    : config.fit.trajectory_stride;
  while (std::optional<FunctionalSampled> sample = stream.next()) {
    engine.observe(*sample, executor);
    if (engine.n() == next_snapshot) {
      trajectory.push_back({engine.n(), engine.gm().average});
      next_snapshot = config.fit.trajectory_stride == 0
                          ? next_snapshot * 2
                          : next_snapshot + config.fit.trajectory_stride;
    }
  }
  if (engine.n() == 0) throw Error("run: input stream produced no valid samples");
  if (trajectory.empty() || trajectory.back().n != engine.n())
    trajectory.push_back({engine.n(), engine.gm().average});

  // Band availability is a property of the stream length, so report it as a
  // config problem when the stream turned out shorter than the burn-in.
  if (with_bands &&
      engine.n() <= static_cast<std::uint64_t>(config.inference.burn_in))
    throw Error(
        "run: stream ended during the inference burn-in (" +
        std::to_string(engine.n()) + " samples, burn-in " +
        std::to_string(config.inference.burn_in) +
        "); lower inference.burn_in or disable inference");

  const CoefficientFieldd& estimate = engine.gm().average;
  CoefficientFieldd exported = estimate;
  std::vector<ConfidenceBandd> bands;
  if (with_bands)
    for (double tau : config.inference.levels) {
      bands.push_back(engine.percentile_band(tau));
      bands.push_back(engine.variance_band(tau));
    }

  if (config.fit.output_grid >= 2) {
    const Gridd query = grid_uniform(config.fit.output_grid);
    exported = interpolate_field(estimate, query);
    for (ConfidenceBandd& band : bands) {
      CoefficientFieldd lower{band.lower, grid};
      CoefficientFieldd upper{band.upper, grid};
      band.lower = interpolate_field(lower, query).values;
      band.upper = interpolate_field(upper, query).values;
    }
  }

  write_field_csv(out_path(config, "estimate.csv"), exported);
  if (with_bands) {
    std::vector<BandExportRow> rows;
    for (std::size_t bi = 0; bi < bands.size(); ++bi)
      rows.push_back({method_name(bands[bi].method), bands[bi].level, &bands[bi]});
    write_bands_csv(out_path(config, "bands.csv"), exported, rows);
  }
  write_trajectory_csv(out_path(config, "trajectory.csv"), trajectory);

  // Persist the running standardization moments so a resumed run scales
  // incoming rows identically.
  save_snapshot(out_path(config, "state.fsnap"), engine,
                stream.moments() ? &*stream.moments() : nullptr);

  nlohmann::json results;
  results["observations"] = engine.n();
  results["covariates"] = d;
  results["grid_size"] = grid.size();
  results["trajectory_points"] = trajectory.size();
  results["bands"] = with_bands;
  const nlohmann::json report =
      make_report(config, stream.dropped_rows(), std::move(results));
  write_report(out_path(config, "report.json"), report);
  return report;
}

nlohmann::json run_infer(const RunConfig& config) {
  config.validate();
  Snapshot snap = load_snapshot(config.input.path);
  const CoefficientFieldd& estimate = snap.engine.gm().average;

  std::vector<ConfidenceBandd> bands;
  std::vector<BandExportRow> rows;
  for (double tau : config.inference.levels) {
    bands.push_back(snap.engine.percentile_band(tau));
    bands.push_back(snap.engine.variance_band(tau));
  }
  for (std::size_t bi = 0; bi < bands.size(); ++bi)
    rows.push_back({method_name(bands[bi].method), bands[bi].level, &bands[bi]});

  write_field_csv(out_path(config, "estimate.csv"), estimate);
  write_bands_csv(out_path(config, "bands.csv"), estimate, rows);

  nlohmann::json results;
  results["observations"] = snap.engine.n();
  results["chains"] = snap.engine.chain_count();
  results["burn_in"] = snap.engine.burn_in();
  const nlohmann::json report = make_report(config, 0, std::move(results));
  write_report(out_path(config, "report.json"), report);
  return report;
}

nlohmann::json run_benchmark(const RunConfig& config) {
  config.validate();
  const std::uint64_t R = config.replications;
  const Eigen::Index d = kDgpCovariates;

  struct Rep {
    Vectord online, irls, ls;
  };
  std::vector<Rep> reps(R);

  ThreadPool pool(config.threads);
  pool.run(static_cast<Eigen::Index>(R), [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index r = begin; r < end; ++r) {
      DgpConfig dgp = config.dgp;
      dgp.seed = replication_seed(config, static_cast<std::uint64_t>(r));
      const Datasetd data = generate_dataset<double>(dgp);
      const CoefficientFieldd truth = true_beta(data.grid, dgp.beta3);

      GmState<double> state = GmState<double>::zero(d, data.grid, config.schedule);
      FunctionalSampled sample;
      for (Eigen::Index i = 0; i < data.size(); ++i) {
        sample.x = data.x.row(i).transpose();
        sample.y = data.y.row(i).transpose();
        observe(state, sample);
      }
      Rep& rep = reps[static_cast<std::size_t>(r)];
      rep.online = rmise(state.average, truth);
      rep.irls = rmise(fit_gm_offline(data).field, truth);
      rep.ls = rmise(fit_ls_offline(data), truth);
    }
  });

  const char* names[3] = {"online_gm", "offline_gm", "offline_ls"};
  std::vector<Vectord> per_method[3];
  for (const Rep& rep : reps) {
    per_method[0].push_back(rep.online);
    per_method[1].push_back(rep.irls);
    per_method[2].push_back(rep.ls);
  }

  nlohmann::json results;
  results["n"] = config.dgp.n;
  results["replications"] = R;
  for (int k = 0; k < 3; ++k) results[names[k]] = summaries_to_json(per_method[k]);
  {
    // Convenience ratios of mean RMISE, per coefficient.
    auto mean_of = [&](int k, Eigen::Index j) {
      return results[names[k]]["mean"][static_cast<std::size_t>(j)].get<double>();
    };
    Vectord online_vs_offline(d), gm_vs_ls(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      online_vs_offline[j] = mean_of(0, j) / mean_of(1, j);
      gm_vs_ls[j] = mean_of(1, j) / mean_of(2, j);
    }
    results["ratios"] = {{"online_gm_vs_offline_gm", to_json(online_vs_offline)},
                         {"offline_gm_vs_offline_ls", to_json(gm_vs_ls)}};
  }

  {
    std::ofstream csv(out_path(config, "benchmark.csv"));
    if (!csv) throw Error("run: cannot write benchmark.csv");
    csv << "rep,method";
    for (Eigen::Index j = 0; j < d; ++j) csv << ",rmise" << (j + 1);
    csv << "\n";
    for (std::uint64_t r = 0; r < R; ++r) {
      const Vectord* rows[3] = {&reps[r].online, &reps[r].irls, &reps[r].ls};
      for (int k = 0; k < 3; ++k) {
        csv << r << "," << names[k];
        for (Eigen::Index j = 0; j < d; ++j)
          csv << "," << format_double((*rows[k])[j]);
        csv << "\n";
      }
    }
  }

  const nlohmann::json report = make_report(config, 0, std::move(results));
  write_report(out_path(config, "report.json"), report);
  return report;
}

}  // namespace fsr::io
