#include "spillnet/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"

namespace spillnet {

double PipelineConfig::resolved_zeta(int n_securities) const {
    if (zeta) return *zeta;
    return 2.0 / n_securities;
}

void PipelineConfig::validate() const {
    window.validate();
    if (lag < 1) throw ConfigError("lag must be >= 1");
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
    if (zeta && *zeta < 0.0) throw ConfigError("zeta must be >= 0");
    if (interlayer_min_windows < 2) throw ConfigError("interlayer_min_windows must be >= 2");
    if (forest.n_trees < 1) throw ConfigError("forest_trees must be >= 1");
    if (forest.max_depth < 0) throw ConfigError("forest_max_depth must be >= 0");
    if (forest.min_samples_leaf < 1) throw ConfigError("forest_min_samples_leaf must be >= 1");
    if (forest.mtry < 0) throw ConfigError("forest_mtry must be >= 0 (0 = auto)");
    if (ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
    if (lstm_seq_len < 1) throw ConfigError("lstm_seq_len must be >= 1");
    if (lstm_units1 < 1 || lstm_units2 < 1) throw ConfigError("lstm units must be >= 1");
    if (lstm_dropout < 0.0 || lstm_dropout >= 1.0)
        throw ConfigError("lstm_dropout must lie in [0, 1)");
    if (lstm_learning_rate <= 0.0) throw ConfigError("lstm_learning_rate must be > 0");
    if (lstm_epochs < 1) throw ConfigError("lstm_epochs must be >= 1");
    if (lstm_batch < 1) throw ConfigError("lstm_batch must be >= 1");
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "' (expected " +
                      expected + ")");
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        bad_value(key, value, "an integer");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        bad_value(key, value, "a number");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    bad_value(key, value, "true or false");
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"data", [](PipelineConfig& c, const std::string& v) { c.data = v; }},
        {"output_dir", [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
        {"seed",
         [](PipelineConfig& c, const std::string& v) {
             c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
         }},
        {"window_size",
         [](PipelineConfig& c, const std::string& v) {
             c.window.size = static_cast<int>(parse_int("window_size", v));
         }},
        {"window_step",
         [](PipelineConfig& c, const std::string& v) {
             c.window.step = static_cast<int>(parse_int("window_step", v));
         }},
        {"lag",
         [](PipelineConfig& c, const std::string& v) {
             c.lag = static_cast<int>(parse_int("lag", v));
         }},
        {"theta",
         [](PipelineConfig& c, const std::string& v) { c.theta = parse_double("theta", v); }},
        {"zeta",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "auto")
                 c.zeta.reset();
             else
                 c.zeta = parse_double("zeta", v);
         }},
        {"log_returns",
         [](PipelineConfig& c, const std::string& v) { c.log_returns = parse_bool("log_returns", v); }},
        {"degree_mode",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "in")
                 c.degree_mode = net::DegreeMode::In;
             else if (v == "out")
                 c.degree_mode = net::DegreeMode::Out;
             else if (v == "total")
                 c.degree_mode = net::DegreeMode::Total;
             else
                 bad_value("degree_mode", v, "in, out or total");
         }},
        {"degree_aggregation",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "mean")
                 c.degree_aggregation = net::DegreeAggregation::Mean;
             else if (v == "sum")
                 c.degree_aggregation = net::DegreeAggregation::Sum;
             else
                 bad_value("degree_aggregation", v, "mean or sum");
         }},
        {"interlayer_aggregate",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "mean")
                 c.interlayer_aggregate = market::Aggregator::Mean;
             else if (v == "min")
                 c.interlayer_aggregate = market::Aggregator::Min;
             else
                 bad_value("interlayer_aggregate", v, "mean or min");
         }},
        {"interlayer_min_windows",
         [](PipelineConfig& c, const std::string& v) {
             c.interlayer_min_windows = static_cast<int>(parse_int("interlayer_min_windows", v));
         }},
        {"forest_trees",
         [](PipelineConfig& c, const std::string& v) {
             c.forest.n_trees = static_cast<int>(parse_int("forest_trees", v));
         }},
        {"forest_max_depth",
         [](PipelineConfig& c, const std::string& v) {
             c.forest.max_depth = static_cast<int>(parse_int("forest_max_depth", v));
         }},
        {"forest_min_samples_leaf",
         [](PipelineConfig& c, const std::string& v) {
             c.forest.min_samples_leaf =
                 static_cast<int>(parse_int("forest_min_samples_leaf", v));
         }},
        {"forest_mtry",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "auto")
                 c.forest.mtry = 0;
             else
                 c.forest.mtry = static_cast<int>(parse_int("forest_mtry", v));
         }},
        {"forest_bootstrap",
         [](PipelineConfig& c, const std::string& v) {
             c.forest.bootstrap = parse_bool("forest_bootstrap", v);
         }},
        {"ridge_lambda",
         [](PipelineConfig& c, const std::string& v) {
             c.ridge_lambda = parse_double("ridge_lambda", v);
         }},
        {"ridge_cv",
         [](PipelineConfig& c, const std::string& v) { c.ridge_cv = parse_bool("ridge_cv", v); }},
        {"lstm_seq_len",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_seq_len = static_cast<int>(parse_int("lstm_seq_len", v));
         }},
        {"lstm_units1",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_units1 = static_cast<int>(parse_int("lstm_units1", v));
         }},
        {"lstm_units2",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_units2 = static_cast<int>(parse_int("lstm_units2", v));
         }},
        {"lstm_dropout",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_dropout = parse_double("lstm_dropout", v);
         }},
        {"lstm_learning_rate",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_learning_rate = parse_double("lstm_learning_rate", v);
         }},
        {"lstm_epochs",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_epochs = static_cast<int>(parse_int("lstm_epochs", v));
         }},
        {"lstm_batch",
         [](PipelineConfig& c, const std::string& v) {
             c.lstm_batch = static_cast<int>(parse_int("lstm_batch", v));
         }},
        {"lstm_features",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "full")
                 c.lstm_features = LstmFeatureSet::Full;
             else if (v == "target_only")
                 c.lstm_features = LstmFeatureSet::TargetOnly;
             else
                 bad_value("lstm_features", v, "full or target_only");
         }},
        {"crisis_dates",
         [](PipelineConfig& c, const std::string& v) {
             c.crisis_dates.clear();
             if (v.empty()) return;
             for (const auto& field : csv::split_line(v)) {
                 try {
                     c.crisis_dates.push_back(Date::parse(field));
                 } catch (const DataError&) {
                     bad_value("crisis_dates", field, "comma-separated YYYY-MM-DD dates");
                 }
             }
         }},
    };
    return table;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    PipelineConfig config;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        it->second(config, value);
    }
    config.validate();
    return config;
}

PipelineConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

std::string serialize_config(const PipelineConfig& c) {
    std::ostringstream out;
    auto num = [](double v) { return csv::format_value(v); };
    out << "data = " << c.data << '\n';
    out << "output_dir = " << c.output_dir << '\n';
    out << "seed = " << c.seed << '\n';
    out << "window_size = " << c.window.size << '\n';
    out << "window_step = " << c.window.step << '\n';
    out << "lag = " << c.lag << '\n';
    out << "theta = " << num(c.theta) << '\n';
    out << "zeta = " << (c.zeta ? num(*c.zeta) : std::string("auto")) << '\n';
    out << "log_returns = " << (c.log_returns ? "true" : "false") << '\n';
    out << "degree_mode = "
        << (c.degree_mode == net::DegreeMode::In
                ? "in"
                : c.degree_mode == net::DegreeMode::Out ? "out" : "total")
        << '\n';
    out << "degree_aggregation = "
        << (c.degree_aggregation == net::DegreeAggregation::Mean ? "mean" : "sum") << '\n';
    out << "interlayer_aggregate = "
        << (c.interlayer_aggregate == market::Aggregator::Mean ? "mean" : "min") << '\n';
    out << "interlayer_min_windows = " << c.interlayer_min_windows << '\n';
    out << "forest_trees = " << c.forest.n_trees << '\n';
    out << "forest_max_depth = " << c.forest.max_depth << '\n';
    out << "forest_min_samples_leaf = " << c.forest.min_samples_leaf << '\n';
    out << "forest_mtry = ";
    if (c.forest.mtry == 0)
        out << "auto\n";
    else
        out << c.forest.mtry << '\n';
    out << "forest_bootstrap = " << (c.forest.bootstrap ? "true" : "false") << '\n';
    out << "ridge_lambda = " << num(c.ridge_lambda) << '\n';
    out << "ridge_cv = " << (c.ridge_cv ? "true" : "false") << '\n';
    out << "lstm_seq_len = " << c.lstm_seq_len << '\n';
    out << "lstm_units1 = " << c.lstm_units1 << '\n';
    out << "lstm_units2 = " << c.lstm_units2 << '\n';
    out << "lstm_dropout = " << num(c.lstm_dropout) << '\n';
    out << "lstm_learning_rate = " << num(c.lstm_learning_rate) << '\n';
    out << "lstm_epochs = " << c.lstm_epochs << '\n';
    out << "lstm_batch = " << c.lstm_batch << '\n';
    out << "lstm_features = "
        << (c.lstm_features == LstmFeatureSet::Full ? "full" : "target_only") << '\n';
    out << "crisis_dates = ";
    for (std::size_t i = 0; i < c.crisis_dates.size(); ++i) {
        if (i) out << ',';
        out << c.crisis_dates[i].to_string();
    }
    out << '\n';
    return out.str();
}

} // namespace spillnet
