#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spillnet/market_data.hpp"

namespace spillnet::synth {

// Synthetic bar panel with planted structure: a lag-1 Granger chain in
// returns (security i-1 drives security i), a window-lagged trading-value ->
// return spillover on the diagonal, seasonal price paths, and slowly varying
// volumes.
struct SynthConfig {
    int securities = 20;
    int days = 2000;
    std::uint64_t seed = 42;

    double chain_coeff = 0.25;  // return chain strength
    double spill_coeff = 0.006; // trading-value -> return coupling
    double noise_std = 0.01;    // daily return noise
    int spill_lag_days = 30;    // matches the default window step
};

std::vector<market::BarRecord> generate_bars(const SynthConfig& config);

// CSV with the load_bars header, LF line endings.
void write_bars_csv(const std::vector<market::BarRecord>& bars, const std::string& path);

} // namespace spillnet::synth
