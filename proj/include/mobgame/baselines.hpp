#pragma once

#include "mobgame/municipality.hpp"

namespace mobgame {

struct BaselineBudget {
    int evaluations = 1000;  // maximum evaluator invocations
    uint64_t seed = 0;
};

struct GAParams {
    int population = 20;
    int generations = 50;
    double crossover_rate = 0.9;
    double mutation_rate = 0.3;
    double mutation_scale = 0.1;  // mutation stddev as a fraction of the box width

    void check() const;
};

// Uniform sampling over the policy box; best-so-far trace, one row per
// evaluation.
PolicyOptResult random_search(PolicyEvaluator& evaluator, const PolicyBounds& bounds,
                              const BaselineBudget& budget);

// Real-coded GA: tournament selection of size 2, uniform crossover, Gaussian
// mutation clipped to the box, elitism of 1 (the elite is carried over without
// re-evaluation). Stops early once the evaluation budget is exhausted.
PolicyOptResult genetic_algorithm(PolicyEvaluator& evaluator, const PolicyBounds& bounds,
                                  const GAParams& params, const BaselineBudget& budget);

}  // namespace mobgame
