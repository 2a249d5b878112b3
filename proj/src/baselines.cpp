#include "mobgame/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "mobgame/rng.hpp"

namespace mobgame {

namespace {

Policy sample_policy(std::mt19937_64& rng, const PolicyBounds& bounds) {
    const auto lo = bounds.lower();
    const auto hi = bounds.upper();
    std::array<double, 5> v{};
    for (size_t i = 0; i < 5; ++i) v[i] = uniform(rng, lo[i], hi[i]);
    return Policy::from_vector(v);
}

double fitness(const PolicyEvalResult& r) {
    return r.ok && std::isfinite(r.J) ? r.J : std::numeric_limits<double>::infinity();
}

}  // namespace

void GAParams::check() const {
    if (population < 2) throw std::invalid_argument("population must be >= 2");
    if (generations < 1) throw std::invalid_argument("generations must be >= 1");
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
        mutation_rate > 1.0)
        throw std::invalid_argument("rates must lie in [0, 1]");
    if (mutation_scale < 0.0) throw std::invalid_argument("mutation_scale must be >= 0");
}

PolicyOptResult random_search(PolicyEvaluator& evaluator, const PolicyBounds& bounds,
                              const BaselineBudget& budget) {
    if (budget.evaluations < 1) throw std::invalid_argument("budget must be >= 1");
    bounds.check();

    PolicyOptResult res;
    res.trace.method = "random";
    res.trace.evaluator = evaluator.name();
    std::mt19937_64 rng(budget.seed);
    for (int i = 0; i < budget.evaluations; ++i) {
        Policy z = sample_policy(rng, bounds);
        PolicyEvalResult r = evaluator.evaluate(z);
        ++res.trace.evaluations;
        if (r.ok && r.J < res.best_J) {
            res.best_J = r.J;
            res.best = z;
        }
        res.trace.rows.push_back(
            {i, z, r.J, std::numeric_limits<double>::quiet_NaN(), res.best_J, r.ok});
    }
    res.final = res.best;
    return res;
}

PolicyOptResult genetic_algorithm(PolicyEvaluator& evaluator, const PolicyBounds& bounds,
                                  const GAParams& params, const BaselineBudget& budget) {
    params.check();
    bounds.check();
    if (budget.evaluations < 1) throw std::invalid_argument("budget must be >= 1");
    if (static_cast<long long>(params.population) * params.generations > budget.evaluations)
        throw std::invalid_argument("population * generations exceeds the evaluation budget");

    const auto lo = bounds.lower();
    const auto hi = bounds.upper();
    std::array<double, 5> range{};
    for (size_t i = 0; i < 5; ++i) range[i] = hi[i] - lo[i];

    PolicyOptResult res;
    res.trace.method = "ga";
    res.trace.evaluator = evaluator.name();
    std::mt19937_64 rng(budget.seed);

    struct Indiv {
        Policy z{};
        double fit = std::numeric_limits<double>::infinity();
        bool ok = false;
    };
    auto evaluate = [&](const Policy& z) {
        PolicyEvalResult r = evaluator.evaluate(z);
        int iter = res.trace.evaluations;
        ++res.trace.evaluations;
        if (r.ok && r.J < res.best_J) {
            res.best_J = r.J;
            res.best = z;
        }
        res.trace.rows.push_back(
            {iter, z, r.J, std::numeric_limits<double>::quiet_NaN(), res.best_J, r.ok});
        Indiv ind;
        ind.z = z;
        ind.fit = fitness(r);
        ind.ok = r.ok;
        return ind;
    };
    auto pick_index = [&](size_t n) {
        auto i = static_cast<size_t>(uniform01(rng) * static_cast<double>(n));
        return i >= n ? n - 1 : i;
    };

    std::vector<Indiv> pop;
    for (int i = 0; i < params.population && res.trace.evaluations < budget.evaluations; ++i)
        pop.push_back(evaluate(sample_policy(rng, bounds)));

    for (int gen = 1; gen < params.generations && res.trace.evaluations < budget.evaluations;
         ++gen) {
        size_t elite = 0;
        for (size_t i = 1; i < pop.size(); ++i)
            if (pop[i].fit < pop[elite].fit) elite = i;
        std::vector<Indiv> next;
        next.push_back(pop[elite]);  // carried over, not re-evaluated
        while (static_cast<int>(next.size()) < params.population &&
               res.trace.evaluations < budget.evaluations) {
            auto tournament = [&]() -> const Indiv& {
                size_t a = pick_index(pop.size());
                size_t b = pick_index(pop.size());
                return pop[a].fit <= pop[b].fit ? pop[a] : pop[b];
            };
            const Indiv& p1 = tournament();
            const Indiv& p2 = tournament();
            auto child = p1.z.to_vector();
            if (uniform01(rng) < params.crossover_rate) {
                auto other = p2.z.to_vector();
                for (size_t d = 0; d < 5; ++d)
                    if (uniform01(rng) < 0.5) child[d] = other[d];
            }
            for (size_t d = 0; d < 5; ++d)
                if (uniform01(rng) < params.mutation_rate)
                    child[d] += normal01(rng) * params.mutation_scale * range[d];
            Policy z = project_policy(Policy::from_vector(child), bounds);
            next.push_back(evaluate(z));
        }
        pop = std::move(next);
    }
    res.final = res.best;
    return res;
}

}  // namespace mobgame
