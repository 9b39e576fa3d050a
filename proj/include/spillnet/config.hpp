#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spillnet/dates.hpp"
#include "spillnet/forest.hpp"
#include "spillnet/layer_network.hpp"
#include "spillnet/market_data.hpp"

namespace spillnet {

enum class LstmFeatureSet { Full, TargetOnly };

// Every run parameter. Defaults match the reference setup: 100/30 windows,
// lag 1, theta 0.05, zeta 2/n, forest 200x10, ridge lambda 1, LSTM 100/50
// with dropout 0.3 and Adam at 1e-3.
struct PipelineConfig {
    std::string data;
    std::string output_dir = "out";
    std::uint64_t seed = 42;

    market::WindowSpec window; // size 100, step 30
    int lag = 1;
    double theta = 0.05;
    std::optional<double> zeta; // nullopt = auto (2/n)
    bool log_returns = false;

    net::DegreeMode degree_mode = net::DegreeMode::Total;
    net::DegreeAggregation degree_aggregation = net::DegreeAggregation::Mean;
    market::Aggregator interlayer_aggregate = market::Aggregator::Mean;
    int interlayer_min_windows = 16;

    forest::ForestConfig forest; // seed is derived per stage, not taken from here

    double ridge_lambda = 1.0;
    bool ridge_cv = false;

    int lstm_seq_len = 12;
    int lstm_units1 = 100;
    int lstm_units2 = 50;
    double lstm_dropout = 0.3;
    double lstm_learning_rate = 0.001;
    int lstm_epochs = 300;
    int lstm_batch = 32;
    LstmFeatureSet lstm_features = LstmFeatureSet::Full;

    std::vector<Date> crisis_dates;

    bool operator==(const PipelineConfig&) const = default;

    double resolved_zeta(int n_securities) const;
    void validate() const;
};

// key=value text, '#' comment lines, unknown keys rejected, defaults applied
// for absent keys.
PipelineConfig parse_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");

// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& config);

} // namespace spillnet
