#include <cmath>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "spillnet/csv.hpp"
#include "spillnet/error.hpp"
#include "spillnet/heatmap.hpp"
#include "spillnet/pipeline.hpp"
#include "spillnet/synth.hpp"

namespace {

int run_command(const std::string& config_path) {
    spillnet::PipelineConfig config = spillnet::parse_config(config_path);
    spillnet::RunArtifacts artifacts = spillnet::run_pipeline(config, /*verbose=*/true);
    std::size_t total = 0;
    for (const auto& [role, paths] : artifacts.files) total += paths.size();
    std::cout << "wrote " << total << " artifacts under " << artifacts.output_dir << '\n';
    return 0;
}

int synth_command(int securities, int days, std::uint64_t seed, const std::string& out_dir) {
    spillnet::synth::SynthConfig config;
    config.securities = securities;
    config.days = days;
    config.seed = seed;
    auto bars = spillnet::synth::generate_bars(config);
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/bars.csv";
    spillnet::synth::write_bars_csv(bars, path);
    std::cout << "wrote " << bars.size() << " bars to " << path << '\n';
    return 0;
}

int heatmap_command(const std::string& in_path, const std::string& out_path, double* fill) {
    Eigen::MatrixXd matrix = spillnet::csv::read_matrix(in_path);
    if (fill) {
        for (Eigen::Index i = 0; i < matrix.rows(); ++i)
            for (Eigen::Index j = 0; j < matrix.cols(); ++j)
                if (std::isnan(matrix(i, j))) matrix(i, j) = *fill;
    }
    spillnet::write_heatmap(matrix, out_path);
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granger-causality layer networks, random-forest interlayer spillovers "
                 "and a BiLSTM return forecaster over windowed market indicators"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the full pipeline from a config file");
    run->add_option("--config", config_path, "key=value config file")->required();

    int securities = 20;
    int days = 2000;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    auto* synth = app.add_subcommand("synth", "generate a synthetic bar panel");
    synth->add_option("--securities", securities, "number of securities");
    synth->add_option("--days", days, "number of trading days");
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--out", out_dir, "output directory");

    std::string heat_in, heat_out;
    double fill = 0.0;
    bool has_fill = false;
    auto* heatmap = app.add_subcommand("heatmap", "render a matrix CSV as a PPM heatmap");
    heatmap->add_option("--in", heat_in, "input matrix CSV")->required();
    heatmap->add_option("--out", heat_out, "output PPM path")->required();
    heatmap->add_option("--fill", fill, "value substituted for empty cells")
        ->each([&](const std::string&) { has_fill = true; });

    try {
        app.parse(argc, argv);
        if (run->parsed()) return run_command(config_path);
        if (synth->parsed()) return synth_command(securities, days, seed, out_dir);
        if (heatmap->parsed()) return heatmap_command(heat_in, heat_out, has_fill ? &fill : nullptr);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const spillnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const spillnet::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const spillnet::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
