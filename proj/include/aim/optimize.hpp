#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aim/geometry.hpp"

namespace aim::optimize {

// Objective vector under a uniform minimization convention:
//   neg_unique    = -(unique UV sample count)          (maximize uniques)
//   worst_res     = max(res_x, res_y) in radians       (minimize)
//   neg_worst_fov = -min(fov_x, fov_y)                 (maximize FOV)
// Layouts whose aperture collapses onto a single axis have no defined
// resolution/FOV on the missing axis; they are flagged infeasible and carry
// large sentinel values so sorting stays well defined.
struct ObjectiveVector {
    long neg_unique = 0;
    double worst_res = 0.0;
    double neg_worst_fov = 0.0;
    bool feasible = true;

    long unique() const { return -neg_unique; }
};

// Strict Pareto dominance. Feasible solutions dominate infeasible ones;
// among infeasible solutions only the unique-sample count is compared.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

ObjectiveVector evaluate_objectives(const geometry::PositionGrid& grid,
                                    const std::vector<int>& indices,
                                    double wavelength_mm, double cell_size = 0.5);

// Non-dominated sorting: partitions indices 0..objs.size()-1 into fronts,
// best front first. Every member of front k is dominated by someone in
// front k-1 and by nobody in front k.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<ObjectiveVector>& objs);

// Crowding distances for one front (any member order). Boundary members of
// each objective get +infinity; an objective with zero spread contributes
// nothing.
std::vector<double> crowding_distances(const std::vector<ObjectiveVector>& front);

struct ParetoSolution {
    geometry::ArrayLayout layout;
    ObjectiveVector objectives;
};

struct RandomSearchResult {
    geometry::ArrayLayout layout;
    ObjectiveVector objectives;
    long long trials = 0;
};

// Uniform random distinct-index layouts, best by unique-sample count; ties
// broken by smaller worst_res, then lexicographically smaller index vector.
// Deterministic for a fixed seed independent of thread count: trials are
// split into fixed chunks, each running its own derived RNG stream, and the
// per-chunk winners are combined in chunk order.
// Throws InfeasibleError if no trial produced a feasible layout.
RandomSearchResult random_search(const geometry::PositionGrid& grid, int n_elements,
                                 long long n_trials, double wavelength_mm,
                                 double cell_size, std::uint64_t seed);

struct GaParams {
    int population = 200;          // >= 4 and even
    int generations = 100;         // >= 1
    double crossover_fraction = 0.8;
    double pareto_fraction = 0.6;  // fraction of the population kept as the front
    double mutation_rate = -1.0;   // per-gene probability; negative = 2/n_elements
    std::uint64_t seed = 1;
    int checkpoint_every = 0;      // generations between checkpoints; 0 = off
    std::string checkpoint_path;   // JSON file, atomically rewritten
    std::string resume_from;       // checkpoint to resume; empty = fresh run

    void validate() const; // throws ValidationError on bad values
};

struct GaHistoryEntry {
    int generation = 0;    // 0 = initial population
    long best_unique = 0;  // best feasible member (all-infeasible: best overall)
    double mean_unique = 0.0;
};

struct GaResult {
    std::vector<ParetoSolution> front; // deduplicated rank-1 set, canonical order
    std::vector<GaHistoryEntry> history;
    long long evaluations = 0;
};

// NSGA-II-style multi-objective evolution over n_elements-subsets of the
// grid. Genomes are sorted distinct slot-id vectors. One generation:
//   - binary tournament selection on (rank, crowding),
//   - uniform crossover with duplicate repair from unused ids,
//   - per-gene uniform mutation to an unused id,
//   - elitist survivor selection over parents+children with genome
//     deduplication ahead of the front/crowding truncation.
// The returned front is the feasible rank-1 set of the final population,
// truncated to ceil(pareto_fraction * population) by crowding, sorted by
// (unique desc, worst_res asc, worst_fov desc, indices lex asc).
// Deterministic for fixed (grid, params) independent of thread count.
GaResult ga_multiobjective(const geometry::PositionGrid& grid, int n_elements,
                           const GaParams& params, double wavelength_mm,
                           double cell_size = 0.5);

// Deterministic pick from a front: max unique, then min worst_res, then max
// worst_fov, then lexicographically smallest index vector. Throws
// ValidationError on an empty front.
const ParetoSolution& select_final(const std::vector<ParetoSolution>& front);

// Run report (params, per-generation history, front, selected layout) as a
// JSON document.
std::string ga_report_json(const GaResult& result, const GaParams& params,
                           const geometry::PositionGrid& grid, int n_elements);
std::string random_report_json(const RandomSearchResult& result,
                               const geometry::PositionGrid& grid, int n_elements,
                               std::uint64_t seed);

} // namespace aim::optimize
