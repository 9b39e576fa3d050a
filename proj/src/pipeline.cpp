#include "spillnet/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"
#include "spillnet/feature_lab.hpp"
#include "spillnet/heatmap.hpp"
#include "spillnet/recurrent.hpp"
#include "spillnet/rng.hpp"

namespace fs = std::filesystem;

namespace spillnet {

Metrics report_metrics(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size() || actual.empty())
        throw DataError("report_metrics: need equal nonzero lengths");
    Metrics m;
    m.rho = lab::pearson(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    m.rmse = std::sqrt(sum / static_cast<double>(actual.size()));
    return m;
}

namespace {

// Seed streams per stage so that changing one stage's knobs can never move
// another stage's random draws.
enum SeedStream : std::uint64_t {
    kSeedInterlayerBase = 100, // +relation index
    kSeedLstmInit = 500,
    kSeedLstmTrain = 501,
};

constexpr const char* kLayerOrder[3] = {"price", "return", "trading_value"};

market::Layer layer_at(int idx) {
    switch (idx) {
        case 0: return market::Layer::Price;
        case 1: return market::Layer::Return;
        default: return market::Layer::TradingValue;
    }
}

constexpr forest::Relation kRelations[3] = {
    forest::Relation::PriceToReturn,
    forest::Relation::TradingValueToPrice,
    forest::Relation::TradingValueToReturn,
};

struct StageContext {
    const PipelineConfig& config;
    RunArtifacts& artifacts;
    bool verbose;

    void log(const std::string& message) const {
        if (verbose) std::cout << message << '\n';
    }
    void emit(const std::string& role, const fs::path& relative) {
        artifacts.files[role].push_back(relative.generic_string());
    }
};

template <typename Fn>
void run_stage(StageContext& ctx, const char* name, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("stage ") + name + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string("stage ") + name + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string("stage ") + name + ": " + e.what());
    }
    ctx.artifacts.stages_completed.push_back(name);
}

struct WindowStats {
    std::vector<int> starts; // value-index of each window start
    std::vector<double> mean, min, max, variance;
};

WindowStats window_return_stats(const std::vector<double>& series,
                                const market::WindowSpec& spec) {
    WindowStats stats;
    const int count = market::window_count(static_cast<int>(series.size()), spec);
    for (int k = 0; k < count; ++k) {
        const int begin = k * spec.step;
        double sum = 0.0, lo = series[begin], hi = series[begin];
        for (int i = begin; i < begin + spec.size; ++i) {
            sum += series[i];
            lo = std::min(lo, series[i]);
            hi = std::max(hi, series[i]);
        }
        const double mean = sum / spec.size;
        double var = 0.0;
        for (int i = begin; i < begin + spec.size; ++i)
            var += (series[i] - mean) * (series[i] - mean);
        var /= spec.size;
        stats.starts.push_back(begin);
        stats.mean.push_back(mean);
        stats.min.push_back(lo);
        stats.max.push_back(hi);
        stats.variance.push_back(var);
    }
    return stats;
}

double slice_mean(const std::vector<double>& v, int begin, int end) {
    double sum = 0.0;
    for (int i = begin; i < end; ++i) sum += v[i];
    return sum / (end - begin);
}

double slice_std(const std::vector<double>& v, int begin, int end, double mean) {
    double sq = 0.0;
    for (int i = begin; i < end; ++i) sq += (v[i] - mean) * (v[i] - mean);
    return std::sqrt(sq / (end - begin));
}

void write_manifest(const RunArtifacts& artifacts, const PipelineConfig& config,
                    const std::vector<Date>& dropped_dates) {
    nlohmann::ordered_json doc;
    doc["complete"] = artifacts.complete;
    doc["seed"] = config.seed;
    doc["stages_completed"] = artifacts.stages_completed;
    nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
    for (const auto& d : dropped_dates) dropped.push_back(d.to_string());
    doc["dropped_dates"] = dropped;
    nlohmann::ordered_json files;
    for (const auto& [role, paths] : artifacts.files) files[role] = paths;
    doc["artifacts"] = files;

    std::ofstream out(fs::path(artifacts.output_dir) / "manifest.json", std::ios::binary);
    if (!out) throw DataError("cannot write manifest under '" + artifacts.output_dir + "'");
    out << doc.dump(2) << '\n';
}

} // namespace

RunArtifacts run_pipeline(const PipelineConfig& config, bool verbose) {
    config.validate();
    if (config.data.empty()) throw ConfigError("config has no data path");

    RunArtifacts artifacts;
    artifacts.output_dir = config.output_dir;
    StageContext ctx{config, artifacts, verbose};

    const fs::path out_root(config.output_dir);
    std::error_code ec;
    fs::create_directories(out_root, ec);
    if (ec) throw ConfigError("cannot create output directory '" + config.output_dir + "'");
    for (const char* sub :
         {"pvalues", "adjacency", "interlayer", "interlayer_adjacency", "degrees", "reports",
          "lstm"})
        fs::create_directories(out_root / sub);

    std::vector<Date> dropped_dates;

    try {
        // ---- ingest ------------------------------------------------------
        market::Panel panel;
        std::vector<market::BarRecord> aligned_bars;
        run_stage(ctx, "ingest", [&] {
            auto bars = market::load_bars(config.data);
            panel = market::align_panel(bars, &dropped_dates);
            for (std::size_t i = 0; i < panel.securities.size(); ++i)
                for (std::size_t t = 0; t < panel.dates.size(); ++t)
                    aligned_bars.push_back({panel.dates[t], panel.securities[i],
                                            panel.close[i][t], panel.volume[i][t]});
            ctx.log("[ingest] " + std::to_string(panel.securities.size()) + " securities, " +
                    std::to_string(panel.dates.size()) + " aligned days, " +
                    std::to_string(dropped_dates.size()) + " dropped dates");
        });

        const int n = static_cast<int>(panel.securities.size());
        const int total_days = static_cast<int>(panel.dates.size());

        // ---- indicators ----------------------------------------------------
        // All three layers are re-aligned onto days 1..T-1 so that the return
        // layer (one element shorter by construction) shares the window grid.
        std::array<std::vector<std::vector<double>>, 3> daily; // [layer][security][day]
        std::vector<double> index_return;
        run_stage(ctx, "indicators", [&] {
            if (total_days < 3) throw DataError("panel too short");
            for (auto& layer : daily) layer.assign(n, {});
            auto series = market::compute_indicators(aligned_bars, config.log_returns);
            aligned_bars.clear();
            for (const auto& s : series) {
                const int row = static_cast<int>(
                    std::lower_bound(panel.securities.begin(), panel.securities.end(),
                                     s.security) -
                    panel.securities.begin());
                const int layer = s.layer == market::Layer::Price
                                      ? 0
                                      : (s.layer == market::Layer::Return ? 1 : 2);
                // Price and TradingValue drop day 0 to share the Return grid.
                const std::size_t skip = s.layer == market::Layer::Return ? 0 : 1;
                daily[layer][row].assign(s.values.begin() + skip, s.values.end());
            }
            index_return.assign(total_days - 1, 0.0);
            for (int t = 0; t < total_days - 1; ++t) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) sum += daily[1][i][t];
                index_return[t] = sum / n;
            }
        });

        const int series_len = total_days - 1;

        // ---- windowing -----------------------------------------------------
        WindowStats return_stats;
        std::array<std::vector<std::vector<double>>, 3> windowed; // [layer][security][window]
        int window_total = 0;
        run_stage(ctx, "windowing", [&] {
            if (series_len < config.window.size)
                throw DataError("panel shorter than one window");
            window_total = market::window_count(series_len, config.window);
            return_stats = window_return_stats(index_return, config.window);

            for (int layer = 0; layer < 3; ++layer) {
                windowed[layer].assign(n, {});
                for (int i = 0; i < n; ++i) {
                    market::IndicatorSeries series;
                    series.security = panel.securities[i];
                    series.layer = layer_at(layer);
                    series.values = daily[layer][i];
                    auto features = market::slide_windows(series, config.window,
                                                          config.interlayer_aggregate);
                    windowed[layer][i] = std::move(features.values);
                }
            }

            // window index <-> date table, with crisis annotation
            std::ofstream table(out_root / "windows.csv", std::ios::binary);
            if (!table) throw DataError("cannot write windows.csv");
            table << "window,start_index,start_date,end_date,crisis\n";
            for (int k = 0; k < window_total; ++k) {
                const int begin = k * config.window.step;
                const Date start = panel.dates[1 + begin];
                const Date end = panel.dates[1 + begin + config.window.size - 1];
                bool crisis = false;
                for (const auto& c : config.crisis_dates)
                    crisis = crisis || (start <= c && c <= end);
                table << k << ',' << begin << ',' << start.to_string() << ','
                      << end.to_string() << ',' << (crisis ? 1 : 0) << '\n';
            }
            ctx.emit("window_dates", "windows.csv");
            ctx.log("[windowing] " + std::to_string(window_total) + " windows of " +
                    std::to_string(config.window.size) + " days");
        });

        // ---- granger -------------------------------------------------------
        // One p-value matrix per (layer, window) from the daily values inside
        // that window.
        std::array<std::vector<net::Adjacency>, 3> adjacencies;
        run_stage(ctx, "granger", [&] {
            for (int layer = 0; layer < 3; ++layer) {
                for (int k = 0; k < window_total; ++k) {
                    const int begin = k * config.window.step;
                    std::vector<std::vector<double>> slices(n);
                    for (int i = 0; i < n; ++i)
                        slices[i].assign(daily[layer][i].begin() + begin,
                                         daily[layer][i].begin() + begin + config.window.size);
                    econ::PValueMatrix pvals = econ::pvalue_matrix(slices, config.lag);
                    pvals.layer = layer_at(layer);
                    pvals.window = k;

                    const std::string base =
                        std::string(kLayerOrder[layer]) + "_" + std::to_string(k);
                    econ::write_pvalue_csv(pvals, (out_root / "pvalues" / (base + ".csv")).string());
                    ctx.emit("pvalue_csv", fs::path("pvalues") / (base + ".csv"));

                    Eigen::MatrixXd render = pvals.entries;
                    for (Eigen::Index r = 0; r < render.rows(); ++r)
                        for (Eigen::Index c = 0; c < render.cols(); ++c)
                            if (std::isnan(render(r, c))) render(r, c) = 1.0;
                    write_heatmap(render, (out_root / "pvalues" / (base + ".ppm")).string());
                    ctx.emit("pvalue_heatmap", fs::path("pvalues") / (base + ".ppm"));

                    adjacencies[layer].push_back(net::threshold_pvalues(pvals, config.theta));
                }
            }
            ctx.log("[granger] " + std::to_string(3 * window_total) + " p-value matrices");
        });

        // ---- network -------------------------------------------------------
        std::vector<net::DegreeSeries> degree_features;
        run_stage(ctx, "network", [&] {
            std::vector<int> starts(window_total);
            for (int k = 0; k < window_total; ++k) starts[k] = k * config.window.step;
            for (int layer = 0; layer < 3; ++layer) {
                std::vector<Eigen::MatrixXi> stack;
                for (int k = 0; k < window_total; ++k) {
                    const std::string base =
                        std::string(kLayerOrder[layer]) + "_" + std::to_string(k);
                    net::write_adjacency_csv(adjacencies[layer][k],
                                             (out_root / "adjacency" / (base + ".csv")).string());
                    ctx.emit("adjacency_csv", fs::path("adjacency") / (base + ".csv"));
                    stack.push_back(adjacencies[layer][k].entries);
                }
                auto series = net::degree_feature_series(
                    stack, starts, std::string("degree ") + market::layer_name(layer_at(layer)),
                    config.degree_mode, config.degree_aggregation);
                const std::string file = std::string("degree_") + kLayerOrder[layer] + ".csv";
                net::write_degree_csv(series, (out_root / "degrees" / file).string());
                ctx.emit("degree_csv", fs::path("degrees") / file);
                degree_features.push_back(std::move(series));
            }
        });

        // ---- interlayer ------------------------------------------------------
        // Expanding-history refits give one importance matrix per window from
        // interlayer_min_windows onward.
        const int first_fit =
            std::max(config.interlayer_min_windows,
                     config.lag + 2 * config.forest.min_samples_leaf) -
            1;
        run_stage(ctx, "interlayer", [&] {
            if (first_fit >= window_total)
                throw DataError("not enough windows (" + std::to_string(window_total) +
                                ") for an interlayer fit starting at " +
                                std::to_string(first_fit + 1));
            const double zeta = config.resolved_zeta(n);
            for (int rel_idx = 0; rel_idx < 3; ++rel_idx) {
                const forest::Relation relation = kRelations[rel_idx];
                const int source_layer = relation == forest::Relation::PriceToReturn ? 0 : 2;
                const int target_layer =
                    relation == forest::Relation::TradingValueToPrice ? 0 : 1;

                std::vector<Eigen::MatrixXi> adj_stack;
                std::vector<int> starts;
                for (int k = first_fit; k < window_total; ++k) {
                    std::vector<std::vector<double>> source(n), target(n);
                    for (int i = 0; i < n; ++i) {
                        source[i].assign(windowed[source_layer][i].begin(),
                                         windowed[source_layer][i].begin() + k + 1);
                        target[i].assign(windowed[target_layer][i].begin(),
                                         windowed[target_layer][i].begin() + k + 1);
                    }
                    forest::ForestConfig fc = config.forest;
                    fc.seed = derive_seed(derive_seed(config.seed, kSeedInterlayerBase + rel_idx),
                                          static_cast<std::uint64_t>(k));
                    forest::ImportanceMatrix imp =
                        forest::interlayer_importance(source, target, config.lag, fc);
                    imp.relation = relation;
                    imp.window = k;

                    const std::string base = std::string(forest::relation_tag(relation)) + "_" +
                                             std::to_string(k);
                    forest::write_importance_csv(
                        imp, (out_root / "interlayer" / (base + ".csv")).string());
                    ctx.emit("importance_csv", fs::path("interlayer") / (base + ".csv"));
                    write_heatmap(imp.entries,
                                  (out_root / "interlayer" / (base + ".ppm")).string());
                    ctx.emit("importance_heatmap", fs::path("interlayer") / (base + ".ppm"));

                    forest::InterlayerAdjacency adj = forest::threshold_importance(imp, zeta);
                    forest::write_interlayer_csv(
                        adj, (out_root / "interlayer_adjacency" / (base + ".csv")).string());
                    ctx.emit("interlayer_adjacency_csv",
                             fs::path("interlayer_adjacency") / (base + ".csv"));
                    adj_stack.push_back(adj.entries);
                    starts.push_back(k * config.window.step);
                }
                auto series = net::degree_feature_series(
                    adj_stack, starts,
                    std::string("degree interlayer ") + forest::relation_name(relation),
                    config.degree_mode, config.degree_aggregation);
                const std::string file =
                    std::string("degree_interlayer_") + forest::relation_tag(relation) + ".csv";
                net::write_degree_csv(series, (out_root / "degrees" / file).string());
                ctx.emit("degree_csv", fs::path("degrees") / file);
                degree_features.push_back(std::move(series));
                ctx.log(std::string("[interlayer] ") + forest::relation_tag(relation) + ": " +
                        std::to_string(window_total - first_fit) + " matrices");
            }
        });

        // ---- screening -------------------------------------------------------
        lab::ReturnWindows returns;
        run_stage(ctx, "screening", [&] {
            returns.windows = return_stats.starts;
            returns.stats[0] = return_stats.mean;
            returns.stats[1] = return_stats.min;
            returns.stats[2] = return_stats.max;
            returns.stats[3] = return_stats.variance;
            auto reports = lab::feature_screen(degree_features, returns);
            std::vector<std::string> notes;
            if (!config.crisis_dates.empty()) {
                std::string note = "crisis_dates";
                for (const auto& d : config.crisis_dates) note += " " + d.to_string();
                notes.push_back(note);
            }
            lab::write_screen_csv(reports, (out_root / "reports" / "screening.csv").string(),
                                  notes);
            ctx.emit("screening_report", fs::path("reports") / "screening.csv");
        });

        // The two degree features carried into the ridge check and the LSTM:
        // interlayer trading value -> return, and the trading-value layer.
        const net::DegreeSeries& feat_itvr = degree_features[5];
        const net::DegreeSeries& feat_tv = degree_features[2];

        // ---- ridge -----------------------------------------------------------
        run_stage(ctx, "ridge", [&] {
            // align: interlayer windows are a suffix of the full window range
            const int offset = window_total - static_cast<int>(feat_itvr.values.size());
            const int rows = static_cast<int>(feat_itvr.values.size());
            if (rows < 4) throw DataError("too few interlayer windows for the ridge report");
            Eigen::MatrixXd features(rows, 2);
            Eigen::VectorXd target(rows);
            for (int r = 0; r < rows; ++r) {
                features(r, 0) = feat_itvr.values[r];
                features(r, 1) = feat_tv.values[offset + r];
                target(r) = return_stats.min[offset + r];
            }
            // z-score features
            for (int c = 0; c < 2; ++c) {
                const double mean = features.col(c).mean();
                double sd = std::sqrt((features.col(c).array() - mean).square().sum() / rows);
                if (sd == 0.0) sd = 1.0;
                features.col(c) = (features.col(c).array() - mean) / sd;
            }

            double lambda = config.ridge_lambda;
            if (config.ridge_cv && rows >= 10) {
                const double ladder[] = {0.01, 0.1, 1.0, 10.0, 100.0};
                lambda = lab::ridge_cv_lambda(features, target, ladder);
            }

            std::ofstream out(out_root / "reports" / "ridge.csv", std::ios::binary);
            if (!out) throw DataError("cannot write ridge.csv");
            out << "# lambda " << csv::format_value(lambda) << '\n';
            out << "# features degree_interlayer_trading_value_to_return,degree_trading_value\n";
            out << "block_start,r2\n";
            const int block = std::min(24, rows);
            const int stride = std::max(1, block / 6);
            for (int begin = 0; begin + block <= rows; begin += stride) {
                Eigen::MatrixXd bx = features.middleRows(begin, block);
                Eigen::VectorXd by = target.segment(begin, block);
                lab::RidgeFit fit = lab::ridge_fit(bx, by, lambda);
                Eigen::VectorXd pred = fit.predict(bx);
                std::vector<double> t(by.data(), by.data() + by.size());
                std::vector<double> p(pred.data(), pred.data() + pred.size());
                out << feat_itvr.windows[begin] << ','
                    << csv::format_value(lab::r2_score(t, p)) << '\n';
            }
            ctx.emit("ridge_report", fs::path("reports") / "ridge.csv");
        });

        // ---- lstm ------------------------------------------------------------
        std::vector<double> actual_test, predicted_test;
        run_stage(ctx, "lstm", [&] {
            const int offset = window_total - static_cast<int>(feat_itvr.values.size());
            const int usable = static_cast<int>(feat_itvr.values.size());
            const int seq = config.lstm_seq_len;
            const int sample_count = usable - seq; // target at window t+1
            if (sample_count < 4)
                throw DataError("too few windows for sequence length " + std::to_string(seq));

            int n_val = std::max(1, static_cast<int>(std::lround(0.15 * sample_count)));
            int n_test = std::max(1, static_cast<int>(std::lround(0.15 * sample_count)));
            const int n_train = sample_count - n_val - n_test;
            if (n_train < 1) throw DataError("empty training split");

            // Standardization statistics come from the training portion only.
            // Sample s uses windows [s, s+seq) and target window s+seq (in
            // interlayer-relative indexing).
            const int last_train_target = n_train - 1 + seq;
            std::vector<double> target_series(usable);
            for (int r = 0; r < usable; ++r) target_series[r] = return_stats.min[offset + r];
            const double target_mean = slice_mean(target_series, seq, last_train_target + 1);
            double target_std =
                slice_std(target_series, seq, last_train_target + 1, target_mean);
            if (!(target_std > 0)) throw NumericError("constant training targets");

            auto standardized = market::standardize(target_series, target_mean, target_std);

            const bool full = config.lstm_features == LstmFeatureSet::Full;
            const int dims = full ? 3 : 1;
            std::vector<std::vector<double>> feature_cols;
            feature_cols.push_back(standardized);
            if (full) {
                for (const auto* feat : {&feat_itvr, &feat_tv}) {
                    std::vector<double> col(usable);
                    for (int r = 0; r < usable; ++r)
                        col[r] = feat == &feat_tv ? feat->values[offset + r] : feat->values[r];
                    const double mean = slice_mean(col, 0, last_train_target + 1);
                    double sd = slice_std(col, 0, last_train_target + 1, mean);
                    if (sd == 0.0) sd = 1.0;
                    feature_cols.push_back(market::standardize(col, mean, sd));
                }
            }

            std::vector<Eigen::MatrixXd> sequences(sample_count);
            std::vector<double> targets(sample_count);
            for (int s = 0; s < sample_count; ++s) {
                Eigen::MatrixXd seq_mat(seq, dims);
                for (int t = 0; t < seq; ++t)
                    for (int d = 0; d < dims; ++d) seq_mat(t, d) = feature_cols[d][s + t];
                sequences[s] = std::move(seq_mat);
                targets[s] = standardized[s + seq];
            }

            rnn::BiLstmStack stack =
                rnn::BiLstmStack::init(dims, config.lstm_units1, config.lstm_units2,
                                       config.lstm_dropout, derive_seed(config.seed, kSeedLstmInit));
            rnn::TrainConfig tc;
            tc.epochs = config.lstm_epochs;
            tc.batch_size = config.lstm_batch;
            tc.learning_rate = config.lstm_learning_rate;
            tc.seed = derive_seed(config.seed, kSeedLstmTrain);
            const int n_trainval = n_train + n_val;
            tc.val_fraction = static_cast<double>(n_val) / n_trainval;

            std::vector<Eigen::MatrixXd> trainval(sequences.begin(),
                                                  sequences.begin() + n_trainval);
            std::vector<double> trainval_targets(targets.begin(), targets.begin() + n_trainval);
            rnn::TrainHistory history = rnn::train(stack, trainval, trainval_targets, tc);
            rnn::write_history_csv(history, (out_root / "lstm" / "history.csv").string());
            ctx.emit("train_history", fs::path("lstm") / "history.csv");

            auto predictions = rnn::predict_series(stack, sequences);
            std::ofstream pred_out(out_root / "lstm" / "predictions.csv", std::ios::binary);
            if (!pred_out) throw DataError("cannot write predictions.csv");
            pred_out << "window_start,split,actual,predicted\n";
            for (int s = 0; s < sample_count; ++s) {
                const char* split =
                    s < n_train ? "train" : (s < n_trainval ? "val" : "test");
                pred_out << feat_itvr.windows[s + seq] << ',' << split << ','
                         << csv::format_value(targets[s]) << ','
                         << csv::format_value(predictions[s]) << '\n';
                if (s >= n_trainval) {
                    actual_test.push_back(targets[s]);
                    predicted_test.push_back(predictions[s]);
                }
            }
            ctx.emit("predictions_csv", fs::path("lstm") / "predictions.csv");

            rnn::save_checkpoint(stack, (out_root / "lstm" / "model.ckpt").string(), target_mean,
                                 target_std);
            ctx.emit("checkpoint", fs::path("lstm") / "model.ckpt");
            ctx.log("[lstm] " + std::to_string(sample_count) + " samples, best epoch " +
                    std::to_string(history.best_epoch));
        });

        // ---- metrics -----------------------------------------------------------
        run_stage(ctx, "metrics", [&] {
            std::ofstream out(out_root / "lstm" / "metrics.csv", std::ios::binary);
            if (!out) throw DataError("cannot write metrics.csv");
            out << "metric,value\n";
            const double rmse = std::sqrt(rnn::loss_mse(predicted_test, actual_test));
            if (actual_test.size() >= 2) {
                try {
                    out << "rho," << csv::format_value(lab::pearson(actual_test, predicted_test))
                        << '\n';
                } catch (const NumericError&) {
                    out << "rho,\n"; // constant test segment
                }
            }
            out << "rmse," << csv::format_value(rmse) << '\n';
            ctx.emit("metrics", fs::path("lstm") / "metrics.csv");
        });
    } catch (...) {
        artifacts.complete = false;
        try {
            write_manifest(artifacts, config, dropped_dates);
        } catch (...) {
            // the original failure is the one worth reporting
        }
        throw;
    }

    artifacts.complete = true;
    write_manifest(artifacts, config, dropped_dates);
    return artifacts;
}

} // namespace spillnet
