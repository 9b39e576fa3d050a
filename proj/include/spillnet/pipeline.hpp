#pragma once

#include <map>
#include <string>
#include <vector>

#include "spillnet/config.hpp"

namespace spillnet {

struct Metrics {
    double rho = 0.0;
    double rmse = 0.0;
};

// Pearson correlation and root mean squared error of a prediction series.
Metrics report_metrics(std::span<const double> actual, std::span<const double> predicted);

// Manifest of emitted files keyed by artifact class; written to
// <output_dir>/manifest.json (with complete=false when a stage failed).
struct RunArtifacts {
    std::string output_dir;
    std::map<std::string, std::vector<std::string>> files; // role -> relative paths
    std::vector<std::string> stages_completed;
    bool complete = false;

    bool has_class(const std::string& role) const { return files.count(role) > 0; }
};

// Executes ingest -> windowing -> per-window Granger layers -> degree
// features -> interlayer forests -> screening/ridge -> LSTM -> metrics,
// writing every artifact under config.output_dir. Deterministic per seed.
RunArtifacts run_pipeline(const PipelineConfig& config, bool verbose = false);

} // namespace spillnet
