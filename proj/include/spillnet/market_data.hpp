#pragma once

#include <span>
#include <string>
#include <vector>

#include "spillnet/dates.hpp"

namespace spillnet::market {

enum class Layer { Price, Return, TradingValue };

// File-safe tag: "price", "return", "trading_value".
const char* layer_tag(Layer layer);
// Display name: "price", "return", "trading value".
const char* layer_name(Layer layer);

enum class Aggregator { Mean, Min };
const char* aggregator_name(Aggregator agg);

// One security-day observation.
struct BarRecord {
    Date date;
    int security = 0;
    double close = 0.0;  // > 0
    double volume = 0.0; // >= 0
};

struct IndicatorSeries {
    int security = 0;
    Layer layer = Layer::Price;
    std::vector<double> values;
    std::vector<Date> dates; // aligned with values
};

struct WindowSpec {
    int size = 100;
    int step = 30;

    bool operator==(const WindowSpec&) const = default;

    void validate() const; // size >= 2, step >= 1, step <= size
};

// Number of full windows over a series of the given length; partial
// trailing windows are discarded.
int window_count(int series_length, const WindowSpec& spec);

struct WindowedFeatures {
    int security = 0;
    Layer layer = Layer::Price;
    Aggregator aggregator = Aggregator::Mean;
    std::vector<double> values;
    std::vector<int> window_starts; // value index where each window begins
};

// Reads a CSV with header date,security,close,volume. Records come back
// sorted by (security, date); duplicates and non-positive closes are
// rejected with the offending line number.
std::vector<BarRecord> load_bars(const std::string& path);

// Inner-join alignment: keeps only dates present for every security.
struct Panel {
    std::vector<int> securities;              // ascending ids
    std::vector<Date> dates;                  // common trading days
    std::vector<std::vector<double>> close;   // [security][day]
    std::vector<std::vector<double>> volume;  // [security][day]
};

Panel align_panel(const std::vector<BarRecord>& bars, std::vector<Date>* dropped_dates = nullptr);

// Price = close, TradingValue = close * volume,
// Return_t = (P_t - P_{t-1}) / P_{t-1}  (or ln(P_t / P_{t-1}) when log_returns).
// Three series per security; Return is one element shorter than Price.
std::vector<IndicatorSeries> compute_indicators(const std::vector<BarRecord>& bars,
                                                bool log_returns = false);

// Window k covers value indices [k*step, k*step + size).
WindowedFeatures slide_windows(const IndicatorSeries& series, const WindowSpec& spec,
                               Aggregator aggregator);

// (v - ref_mean) / ref_std elementwise; ref_std must be positive.
std::vector<double> standardize(std::span<const double> values, double ref_mean, double ref_std);

} // namespace spillnet::market
