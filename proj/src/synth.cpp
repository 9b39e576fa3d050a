#include "spillnet/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::synth {

std::vector<market::BarRecord> generate_bars(const SynthConfig& config) {
    if (config.securities < 1 || config.days < 2)
        throw ConfigError("synth: need at least 1 security and 2 days");

    const int n = config.securities;
    const int days = config.days;
    std::mt19937_64 rng = make_rng(config.seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Log-volume: a per-security volume cycle plus mild AR noise. Distinct
    // periods keep the securities distinguishable at window resolution (a
    // shared period would leave antiphase twins that trees cannot tell
    // apart). The spillover feeds this cycle into returns with a
    // one-window-step delay, so windowed trading value at window k-1 drives
    // windowed return at window k; integrating the bounded cycle also yields
    // the seasonal price paths.
    const double cycle_amp = 0.8;
    const double ar_phi = 0.9;
    const double ar_sigma = 0.15;

    std::vector<double> vol_mean(n), cycle_period(n), season_phase(n);
    for (int i = 0; i < n; ++i) {
        vol_mean[i] = std::log(1e6) + 0.3 * gauss(rng);
        cycle_period[i] = 225.0 + 285.0 * i / std::max(1, n - 1);
        season_phase[i] = 250.0 * i / n;
    }

    std::vector<std::vector<double>> log_vol(n, std::vector<double>(days));
    std::vector<double> ar(n, 0.0);
    for (int t = 0; t < days; ++t) {
        for (int i = 0; i < n; ++i) {
            ar[i] = ar_phi * ar[i] + ar_sigma * gauss(rng);
            log_vol[i][t] = vol_mean[i] +
                            cycle_amp * std::sin(2.0 * M_PI * t / cycle_period[i]) + ar[i];
        }
    }

    const double season_amp = 0.0005;
    std::vector<std::vector<double>> returns(n, std::vector<double>(days, 0.0));
    for (int t = 1; t < days; ++t) {
        for (int i = 0; i < n; ++i) {
            double r = season_amp * std::sin(2.0 * M_PI * (t + season_phase[i]) / 250.0);
            if (i > 0 && t >= 2) r += config.chain_coeff * returns[i - 1][t - 1];
            const int lagged = std::max(0, t - config.spill_lag_days);
            r += config.spill_coeff * (log_vol[i][lagged] - vol_mean[i]);
            r += config.noise_std * gauss(rng);
            returns[i][t] = std::max(r, -0.5);
        }
    }

    std::vector<market::BarRecord> bars;
    bars.reserve(static_cast<std::size_t>(n) * days);
    Date date{2000, 1, 3};
    std::vector<double> price(n);
    for (int i = 0; i < n; ++i) price[i] = 20.0 + 5.0 * i;

    for (int t = 0; t < days; ++t) {
        for (int i = 0; i < n; ++i) {
            if (t > 0) price[i] *= 1.0 + returns[i][t];
            market::BarRecord bar;
            bar.date = date;
            bar.security = i;
            bar.close = price[i];
            bar.volume = std::floor(std::exp(log_vol[i][t]));
            bars.push_back(bar);
        }
        date = date.next_weekday();
    }
    return bars;
}

void write_bars_csv(const std::vector<market::BarRecord>& bars, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << "date,security,close,volume\n";
    for (const auto& bar : bars)
        out << bar.date.to_string() << ',' << bar.security << ',' << csv::format_value(bar.close)
            << ',' << csv::format_value(bar.volume) << '\n';
}

} // namespace spillnet::synth
