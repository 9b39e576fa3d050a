#include "spillnet/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"

namespace spillnet::market {

const char* layer_tag(Layer layer) {
    switch (layer) {
        case Layer::Price: return "price";
        case Layer::Return: return "return";
        case Layer::TradingValue: return "trading_value";
    }
    return "?";
}

const char* layer_name(Layer layer) {
    return layer == Layer::TradingValue ? "trading value" : layer_tag(layer);
}

const char* aggregator_name(Aggregator agg) {
    return agg == Aggregator::Mean ? "mean" : "min";
}

void WindowSpec::validate() const {
    // size 1 with step 1 is the degenerate identity window
    if (size < 1) throw ConfigError("window size must be >= 1");
    if (step < 1) throw ConfigError("window step must be >= 1");
    if (step > size) throw ConfigError("window step must not exceed window size");
}

int window_count(int series_length, const WindowSpec& spec) {
    spec.validate();
    if (series_length < spec.size) return 0;
    return (series_length - spec.size) / spec.step + 1;
}

std::vector<BarRecord> load_bars(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
    {
        auto header = csv::split_line(line);
        static const std::vector<std::string> expected = {"date", "security", "close", "volume"};
        if (std::vector<std::string>(header.begin(), header.end()) != expected)
            throw DataError("'" + path + "': expected header date,security,close,volume");
    }

    std::vector<BarRecord> bars;
    std::set<std::pair<int, Date>> seen;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto where = [&] { return "'" + path + "' line " + std::to_string(line_no); };
        auto fields = csv::split_line(line);
        if (fields.size() != 4) throw DataError(where() + ": expected 4 fields");

        BarRecord rec;
        rec.date = [&] {
            try {
                return Date::parse(fields[0]);
            } catch (const DataError& e) {
                throw DataError(where() + ": " + e.what());
            }
        }();
        auto parse_num = [&](const std::string& f, const char* what) {
            try {
                std::size_t pos = 0;
                double v = std::stod(f, &pos);
                if (pos != f.size()) throw std::invalid_argument(f);
                return v;
            } catch (const std::exception&) {
                throw DataError(where() + ": bad " + std::string(what) + " '" + f + "'");
            }
        };
        double sec = parse_num(fields[1], "security id");
        if (sec < 0 || sec != std::floor(sec))
            throw DataError(where() + ": security id must be a non-negative integer");
        rec.security = static_cast<int>(sec);
        rec.close = parse_num(fields[2], "close");
        rec.volume = parse_num(fields[3], "volume");
        if (!(rec.close > 0)) throw DataError(where() + ": close must be > 0");
        if (rec.volume < 0) throw DataError(where() + ": volume must be >= 0");
        if (!seen.emplace(rec.security, rec.date).second)
            throw DataError(where() + ": duplicate (date, security) = (" + rec.date.to_string() +
                            ", " + std::to_string(rec.security) + ")");
        bars.push_back(rec);
    }
    std::sort(bars.begin(), bars.end(), [](const BarRecord& a, const BarRecord& b) {
        return std::tie(a.security, a.date) < std::tie(b.security, b.date);
    });
    return bars;
}

Panel align_panel(const std::vector<BarRecord>& bars, std::vector<Date>* dropped_dates) {
    if (bars.empty()) throw DataError("empty bar panel");

    std::set<int> ids;
    std::map<Date, int> date_count;
    for (const auto& b : bars) {
        ids.insert(b.security);
        ++date_count[b.date];
    }
    const int n = static_cast<int>(ids.size());

    Panel panel;
    panel.securities.assign(ids.begin(), ids.end());
    std::set<Date> kept;
    for (const auto& [date, count] : date_count) {
        if (count == n)
            kept.insert(date);
        else if (dropped_dates)
            dropped_dates->push_back(date);
    }
    if (kept.empty()) throw DataError("no date is present for every security");
    panel.dates.assign(kept.begin(), kept.end());

    std::map<int, int> sec_row;
    for (int i = 0; i < n; ++i) sec_row[panel.securities[i]] = i;
    std::map<Date, int> date_col;
    for (std::size_t j = 0; j < panel.dates.size(); ++j) date_col[panel.dates[j]] = static_cast<int>(j);

    panel.close.assign(n, std::vector<double>(panel.dates.size(), 0.0));
    panel.volume.assign(n, std::vector<double>(panel.dates.size(), 0.0));
    for (const auto& b : bars) {
        auto it = date_col.find(b.date);
        if (it == date_col.end()) continue;
        int row = sec_row[b.security];
        panel.close[row][it->second] = b.close;
        panel.volume[row][it->second] = b.volume;
    }
    return panel;
}

std::vector<IndicatorSeries> compute_indicators(const std::vector<BarRecord>& bars,
                                                bool log_returns) {
    std::map<int, std::vector<const BarRecord*>> by_security;
    for (const auto& b : bars) by_security[b.security].push_back(&b);

    std::vector<IndicatorSeries> out;
    for (auto& [sec, recs] : by_security) {
        if (recs.size() < 2)
            throw DataError("security " + std::to_string(sec) + " has fewer than 2 bars");
        std::sort(recs.begin(), recs.end(),
                  [](const BarRecord* a, const BarRecord* b) { return a->date < b->date; });

        IndicatorSeries price{sec, Layer::Price, {}, {}};
        IndicatorSeries value{sec, Layer::TradingValue, {}, {}};
        IndicatorSeries ret{sec, Layer::Return, {}, {}};
        for (const auto* r : recs) {
            price.values.push_back(r->close);
            price.dates.push_back(r->date);
            value.values.push_back(r->close * r->volume);
            value.dates.push_back(r->date);
        }
        for (std::size_t t = 1; t < price.values.size(); ++t) {
            double prev = price.values[t - 1];
            double cur = price.values[t];
            ret.values.push_back(log_returns ? std::log(cur / prev) : (cur - prev) / prev);
            ret.dates.push_back(price.dates[t]);
        }
        out.push_back(std::move(price));
        out.push_back(std::move(ret));
        out.push_back(std::move(value));
    }
    return out;
}

WindowedFeatures slide_windows(const IndicatorSeries& series, const WindowSpec& spec,
                               Aggregator aggregator) {
    spec.validate();
    const int n = static_cast<int>(series.values.size());
    if (n < spec.size)
        throw DataError("series length " + std::to_string(n) + " is shorter than one window (" +
                        std::to_string(spec.size) + ")");

    WindowedFeatures out;
    out.security = series.security;
    out.layer = series.layer;
    out.aggregator = aggregator;
    const int count = window_count(n, spec);
    out.values.reserve(count);
    out.window_starts.reserve(count);
    for (int k = 0; k < count; ++k) {
        const int begin = k * spec.step;
        double acc = series.values[begin];
        for (int i = begin + 1; i < begin + spec.size; ++i) {
            double v = series.values[i];
            if (aggregator == Aggregator::Mean)
                acc += v;
            else
                acc = std::min(acc, v);
        }
        if (aggregator == Aggregator::Mean) acc /= spec.size;
        out.values.push_back(acc);
        out.window_starts.push_back(begin);
    }
    return out;
}

std::vector<double> standardize(std::span<const double> values, double ref_mean, double ref_std) {
    if (!(ref_std > 0)) throw NumericError("standardize: ref_std must be > 0");
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back((v - ref_mean) / ref_std);
    return out;
}

} // namespace spillnet::market
