#pragma once

#include <cstdint>
#include <string>

#include "fraclab/percolation.hpp"

namespace fraclab {

// Monte Carlo experiment over independent trials of one model.  The record
// is deterministic for a fixed (config, seed): per-trial lines are emitted
// in trial order and neither the worker count nor wall-clock enters the
// text, so identical seeds give byte-identical records under any worker
// count.
struct ExperimentConfig {
    enum class Analysis { Volume, Subtree, ExtractDense, Offspring };

    ModelSpec model;
    int depth = 1;
    std::uint64_t trials = 1;
    SeedSpec seed;
    int workers = 1;
    Analysis analysis = Analysis::Volume;
    bool condition_nonextinct = false;
    int max_retries = 1000;
    int offspring_level = 0;  // Offspring only

    void validate() const;
};

struct ExperimentRecord {
    std::string text;          // the persisted record
    bool verification_ok = true;
    double elapsed_seconds = 0.0;  // reported separately, never in `text`
};

ExperimentRecord run_mc(const ExperimentConfig& config);

}  // namespace fraclab
