#include "aim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "aim/error.hpp"
#include "aim/io.hpp"
#include "aim/metrics.hpp"
#include "aim/rng.hpp"

namespace aim::optimize {

namespace {

// Sentinel for the resolution/FOV components of infeasible layouts: large and
// finite so comparator and crowding arithmetic never meet NaN or infinity.
constexpr double kInfeasibleSentinel = std::numeric_limits<double>::max();

// Ascending lexicographic order on the minimization components.
bool objective_lex_less(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.neg_unique != b.neg_unique) return a.neg_unique < b.neg_unique;
    if (a.worst_res != b.worst_res) return a.worst_res < b.worst_res;
    return a.neg_worst_fov < b.neg_worst_fov;
}

// Draws a sorted n-subset of the ids 1..n_total (partial Fisher-Yates on a
// scratch id array).
std::vector<int> sample_subset(Rng& rng, std::vector<int>& scratch_ids, int n_total, int n) {
    scratch_ids.resize(static_cast<std::size_t>(n_total));
    for (int i = 0; i < n_total; ++i) scratch_ids[static_cast<std::size_t>(i)] = i + 1;
    for (int k = 0; k < n; ++k) {
        const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_total - k)));
        std::swap(scratch_ids[static_cast<std::size_t>(k)], scratch_ids[static_cast<std::size_t>(j)]);
    }
    std::vector<int> genome(scratch_ids.begin(), scratch_ids.begin() + n);
    std::sort(genome.begin(), genome.end());
    return genome;
}

// k-th id (0-based) not marked used. Caller guarantees k < number of unused ids.
int nth_unused(const std::vector<char>& used, int k) {
    for (int id = 1; id < static_cast<int>(used.size()); ++id) {
        if (used[static_cast<std::size_t>(id)]) continue;
        if (k == 0) return id;
        --k;
    }
    throw ValidationError("internal error: ran out of unused slot ids");
}

struct Individual {
    std::vector<int> genome; // sorted distinct slot ids
    ObjectiveVector obj;
    int rank = 0;
    double crowd = 0.0;
};

// Positions of the first occurrence of each distinct genome, in original
// order (stable deduplication).
std::vector<std::size_t> stable_distinct_indices(const std::vector<Individual>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a].genome != v[b].genome) return v[a].genome < v[b].genome;
        return a < b;
    });
    std::vector<std::size_t> kept;
    kept.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || v[order[k]].genome != v[order[k - 1]].genome) kept.push_back(order[k]);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

void evaluate_population(const geometry::PositionGrid& grid, double wavelength_mm,
                         double cell_size, std::vector<Individual>& pop) {
    const auto count = static_cast<std::ptrdiff_t>(pop.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto& ind = pop[static_cast<std::size_t>(i)];
        ind.obj = evaluate_objectives(grid, ind.genome, wavelength_mm, cell_size);
    }
}

// Rank / crowding annotation of a population in place, order untouched.
// Duplicate genomes share a front (identical vectors never dominate each
// other) and simply crowd each other out.
void annotate(std::vector<Individual>& pop) {
    std::vector<ObjectiveVector> objs(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) objs[i] = pop[i].obj;
    const auto fronts = nondominated_sort(objs);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        std::vector<ObjectiveVector> front_objs;
        front_objs.reserve(fronts[f].size());
        for (auto idx : fronts[f]) front_objs.push_back(objs[idx]);
        const auto crowd = crowding_distances(front_objs);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            pop[fronts[f][k]].rank = static_cast<int>(f);
            pop[fronts[f][k]].crowd = crowd[k];
        }
    }
}

// Elitist survivor selection: stable genome deduplication, then front-by-
// front fill with crowding-based truncation of the split front. If fewer
// distinct genomes exist than slots, the chosen list is cycled to size.
std::vector<Individual> select_survivors(const std::vector<Individual>& combined, int target) {
    std::vector<Individual> distinct;
    const auto kept = stable_distinct_indices(combined);
    distinct.reserve(kept.size());
    for (auto i : kept) distinct.push_back(combined[i]);

    std::vector<ObjectiveVector> objs(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) objs[i] = distinct[i].obj;
    const auto fronts = nondominated_sort(objs);

    std::vector<Individual> next;
    next.reserve(static_cast<std::size_t>(target));
    for (const auto& front : fronts) {
        if (static_cast<int>(next.size()) >= target) break;
        const int room = target - static_cast<int>(next.size());
        if (static_cast<int>(front.size()) <= room) {
            for (auto idx : front) next.push_back(distinct[idx]);
            continue;
        }
        std::vector<ObjectiveVector> front_objs;
        front_objs.reserve(front.size());
        for (auto idx : front) front_objs.push_back(objs[idx]);
        const auto crowd = crowding_distances(front_objs);
        std::vector<std::size_t> order(front.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
            if (objective_lex_less(front_objs[a], front_objs[b])) return true;
            if (objective_lex_less(front_objs[b], front_objs[a])) return false;
            return distinct[front[a]].genome < distinct[front[b]].genome;
        });
        for (int k = 0; k < room; ++k) next.push_back(distinct[front[order[static_cast<std::size_t>(k)]]]);
        break;
    }

    const std::size_t chosen = next.size();
    for (std::size_t k = 0; next.size() < static_cast<std::size_t>(target); ++k)
        next.push_back(next[k % chosen]);
    return next;
}

// Binary tournament on (rank asc, crowding desc); the first pick wins ties.
const Individual& tournament(Rng& rng, const std::vector<Individual>& pop) {
    const auto& a = pop[rng.below(pop.size())];
    const auto& b = pop[rng.below(pop.size())];
    if (b.rank < a.rank) return b;
    if (a.rank < b.rank) return a;
    if (b.crowd > a.crowd) return b;
    return a;
}

// Replaces duplicate genes (second and later occurrences, ascending
// position) with uniform draws from the ids the child does not use yet.
void repair_duplicates(Rng& rng, std::vector<int>& child, std::vector<char>& used, int n_total) {
    std::fill(used.begin(), used.end(), 0);
    std::vector<std::size_t> dup_positions;
    for (std::size_t g = 0; g < child.size(); ++g) {
        auto& flag = used[static_cast<std::size_t>(child[g])];
        if (flag) dup_positions.push_back(g);
        else flag = 1;
    }
    int unused = n_total - static_cast<int>(child.size() - dup_positions.size());
    for (auto g : dup_positions) {
        const int id = nth_unused(used, static_cast<int>(rng.below(static_cast<std::uint64_t>(unused))));
        child[g] = id;
        used[static_cast<std::size_t>(id)] = 1;
        --unused;
    }
}

// Per-gene uniform mutation: with probability `rate` a gene moves to an id
// outside the current genome (always a real change).
void mutate(Rng& rng, std::vector<int>& child, std::vector<char>& used, int n_total, double rate) {
    if (rate <= 0.0) return;
    std::fill(used.begin(), used.end(), 0);
    for (int id : child) used[static_cast<std::size_t>(id)] = 1;
    const int unused = n_total - static_cast<int>(child.size());
    if (unused <= 0) return;
    for (std::size_t g = 0; g < child.size(); ++g) {
        if (rng.uniform01() >= rate) continue;
        const int id = nth_unused(used, static_cast<int>(rng.below(static_cast<std::uint64_t>(unused))));
        used[static_cast<std::size_t>(child[g])] = 0;
        used[static_cast<std::size_t>(id)] = 1;
        child[g] = id;
    }
}

// One generation of offspring. Draw order per pair is fixed (two
// tournaments, crossover coin, per-gene coins, repair draws child by child,
// then mutation draws child by child) so runs are reproducible.
std::vector<Individual> breed(Rng& rng, const std::vector<Individual>& parents, int n_total,
                              double crossover_fraction, double mutation_rate) {
    const int population = static_cast<int>(parents.size());
    std::vector<Individual> children;
    children.reserve(static_cast<std::size_t>(population));
    std::vector<char> used(static_cast<std::size_t>(n_total) + 1, 0);
    for (int pair = 0; pair < population / 2; ++pair) {
        const auto& pa = tournament(rng, parents);
        const auto& pb = tournament(rng, parents);
        std::vector<int> c1, c2;
        if (rng.uniform01() < crossover_fraction) {
            const std::size_t n = pa.genome.size();
            c1.resize(n);
            c2.resize(n);
            for (std::size_t g = 0; g < n; ++g) {
                const bool coin = (rng.next() & 1ULL) != 0;
                c1[g] = coin ? pa.genome[g] : pb.genome[g];
                c2[g] = coin ? pb.genome[g] : pa.genome[g];
            }
            repair_duplicates(rng, c1, used, n_total);
            repair_duplicates(rng, c2, used, n_total);
        } else {
            c1 = pa.genome;
            c2 = pb.genome;
        }
        mutate(rng, c1, used, n_total, mutation_rate);
        mutate(rng, c2, used, n_total, mutation_rate);
        std::sort(c1.begin(), c1.end());
        std::sort(c2.begin(), c2.end());
        children.push_back({std::move(c1), {}, 0, 0.0});
        children.push_back({std::move(c2), {}, 0, 0.0});
    }
    return children;
}

GaHistoryEntry make_history_entry(int generation, const std::vector<Individual>& pop) {
    GaHistoryEntry e;
    e.generation = generation;
    long best_feasible = std::numeric_limits<long>::min();
    long best_any = std::numeric_limits<long>::min();
    double sum = 0.0;
    for (const auto& ind : pop) {
        const long u = ind.obj.unique();
        sum += static_cast<double>(u);
        best_any = std::max(best_any, u);
        if (ind.obj.feasible) best_feasible = std::max(best_feasible, u);
    }
    e.best_unique = best_feasible != std::numeric_limits<long>::min() ? best_feasible : best_any;
    e.mean_unique = pop.empty() ? 0.0 : sum / static_cast<double>(pop.size());
    return e;
}

nlohmann::json objectives_json(const ObjectiveVector& o) {
    nlohmann::json j;
    j["unique_samples"] = o.unique();
    j["feasible"] = o.feasible;
    if (o.feasible) {
        j["worst_resolution_rad"] = o.worst_res;
        j["worst_fov_halfwidth"] = -o.neg_worst_fov;
    } else {
        j["worst_resolution_rad"] = nullptr;
        j["worst_fov_halfwidth"] = nullptr;
    }
    return j;
}

nlohmann::json solution_json(const ParetoSolution& s) {
    nlohmann::json j = objectives_json(s.objectives);
    j["indices"] = s.layout.indices;
    return j;
}

nlohmann::json params_json(const GaParams& p, double effective_mutation) {
    return nlohmann::json{{"population", p.population},
                          {"generations", p.generations},
                          {"crossover_fraction", p.crossover_fraction},
                          {"pareto_fraction", p.pareto_fraction},
                          {"mutation_rate", effective_mutation},
                          {"seed", p.seed}};
}

struct GaState {
    int generation = 0;
    long long evaluations = 0;
    Rng rng;
    std::vector<Individual> pop;
    std::vector<GaHistoryEntry> history;
};

void write_checkpoint(const std::string& path, const GaState& st, const GaParams& params,
                      const std::string& grid_name, int n_elements, double effective_mutation) {
    nlohmann::json j;
    j["format"] = "ga-checkpoint-v1";
    j["grid"] = grid_name;
    j["n_elements"] = n_elements;
    j["params"] = params_json(params, effective_mutation);
    j["generation"] = st.generation;
    j["evaluations"] = st.evaluations;
    j["rng_state"] = st.rng.state();
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& ind : st.pop) pop.push_back(ind.genome);
    j["population"] = std::move(pop);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : st.history)
        hist.push_back({{"generation", h.generation},
                        {"best_unique", h.best_unique},
                        {"mean_unique", h.mean_unique}});
    j["history"] = std::move(hist);
    io::atomic_write_text(path, j.dump(2) + "\n");
}

GaState load_checkpoint(const std::string& path, const GaParams& params,
                        const std::string& grid_name, int n_elements) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open checkpoint file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError("cannot parse checkpoint '" + path + "': " + e.what());
    }
    if (j.value("format", "") != "ga-checkpoint-v1")
        throw ValidationError("'" + path + "' is not a recognized checkpoint file");
    if (j.at("grid").get<std::string>() != grid_name)
        throw ValidationError("checkpoint grid '" + j.at("grid").get<std::string>() +
                              "' does not match grid '" + grid_name + "'");
    if (j.at("n_elements").get<int>() != n_elements)
        throw ValidationError("checkpoint selects " + j.at("n_elements").dump() +
                              " elements, run requested " + std::to_string(n_elements));
    if (j.at("params").at("population").get<int>() != params.population)
        throw ValidationError("checkpoint population " + j.at("params").at("population").dump() +
                              " does not match requested population " +
                              std::to_string(params.population));
    GaState st;
    st.generation = j.at("generation").get<int>();
    st.evaluations = j.at("evaluations").get<long long>();
    const auto state_words = j.at("rng_state").get<std::array<std::uint64_t, 4>>();
    st.rng.state() = state_words;
    for (const auto& genome : j.at("population")) {
        Individual ind;
        ind.genome = genome.get<std::vector<int>>();
        st.pop.push_back(std::move(ind));
    }
    if (static_cast<int>(st.pop.size()) != params.population)
        throw ValidationError("checkpoint holds " + std::to_string(st.pop.size()) +
                              " genomes, expected " + std::to_string(params.population));
    for (const auto& h : j.at("history")) {
        GaHistoryEntry e;
        e.generation = h.at("generation").get<int>();
        e.best_unique = h.at("best_unique").get<long>();
        e.mean_unique = h.at("mean_unique").get<double>();
        st.history.push_back(e);
    }
    return st;
}

// Preference order shared by the canonical front ordering and select_final:
// unique desc, worst_res asc, worst_fov desc, indices lex asc.
bool preferred(const ParetoSolution& a, const ParetoSolution& b) {
    if (objective_lex_less(a.objectives, b.objectives)) return true;
    if (objective_lex_less(b.objectives, a.objectives)) return false;
    return a.layout.indices < b.layout.indices;
}

} // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (!a.feasible) return a.neg_unique < b.neg_unique;
    const bool no_worse = a.neg_unique <= b.neg_unique && a.worst_res <= b.worst_res &&
                          a.neg_worst_fov <= b.neg_worst_fov;
    const bool better = a.neg_unique < b.neg_unique || a.worst_res < b.worst_res ||
                        a.neg_worst_fov < b.neg_worst_fov;
    return no_worse && better;
}

ObjectiveVector evaluate_objectives(const geometry::PositionGrid& grid,
                                    const std::vector<int>& indices,
                                    double wavelength_mm, double cell_size) {
    geometry::ArrayLayout layout;
    layout.grid_name = grid.name;
    layout.indices = indices;
    std::sort(layout.indices.begin(), layout.indices.end());

    const auto s = geometry::sampling_function(layout, grid, wavelength_mm, cell_size);
    const auto counts = metrics::count_unique(s);
    const auto aperture = geometry::aperture_figures(layout, grid, wavelength_mm);

    ObjectiveVector o;
    o.neg_unique = -counts.unique_samples;
    if (aperture.feasible()) {
        o.worst_res = aperture.worst_resolution_rad();
        o.neg_worst_fov = -aperture.worst_fov_halfwidth();
        o.feasible = true;
    } else {
        o.worst_res = kInfeasibleSentinel;
        o.neg_worst_fov = kInfeasibleSentinel;
        o.feasible = false;
    }
    return o;
}

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<ObjectiveVector>& objs) {
    const std::size_t n = objs.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dominator_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(objs[i], objs[j])) {
                dominated[i].push_back(j);
                ++dominator_count[j];
            } else if (dominates(objs[j], objs[i])) {
                dominated[j].push_back(i);
                ++dominator_count[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominator_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> following;
        for (auto i : current) {
            for (auto j : dominated[i]) {
                if (--dominator_count[j] == 0) following.push_back(j);
            }
        }
        std::sort(following.begin(), following.end());
        fronts.push_back(std::move(current));
        current = std::move(following);
    }
    return fronts;
}

std::vector<double> crowding_distances(const std::vector<ObjectiveVector>& front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    const auto component = [&](std::size_t i, int axis) {
        switch (axis) {
            case 0: return static_cast<double>(front[i].neg_unique);
            case 1: return front[i].worst_res;
            default: return front[i].neg_worst_fov;
        }
    };
    std::vector<std::size_t> order(n);
    for (int axis = 0; axis < 3; ++axis) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = component(a, axis), vb = component(b, axis);
            if (va != vb) return va < vb;
            return a < b;
        });
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        const double range = component(order.back(), axis) - component(order.front(), axis);
        if (range <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (std::isinf(dist[order[k]])) continue;
            dist[order[k]] += (component(order[k + 1], axis) - component(order[k - 1], axis)) / range;
        }
    }
    return dist;
}

RandomSearchResult random_search(const geometry::PositionGrid& grid, int n_elements,
                                 long long n_trials, double wavelength_mm,
                                 double cell_size, std::uint64_t seed) {
    const int n_total = static_cast<int>(grid.slots.size());
    if (n_elements < 2) throw ValidationError("layout needs at least 2 elements");
    if (n_elements > n_total)
        throw ValidationError("cannot select " + std::to_string(n_elements) + " of " +
                              std::to_string(n_total) + " grid slots");
    if (n_trials < 1) throw ValidationError("trial count must be at least 1");

    struct Candidate {
        std::vector<int> genome;
        ObjectiveVector obj;
    };
    // Feasible-first, then unique desc, worst_res asc, indices lex asc.
    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.obj.feasible != b.obj.feasible) return a.obj.feasible;
        if (a.obj.neg_unique != b.obj.neg_unique) return a.obj.neg_unique < b.obj.neg_unique;
        if (a.obj.feasible && a.obj.worst_res != b.obj.worst_res)
            return a.obj.worst_res < b.obj.worst_res;
        return a.genome < b.genome;
    };

    constexpr long long kChunk = 4096;
    const long long n_chunks = (n_trials + kChunk - 1) / kChunk;
    std::vector<std::optional<Candidate>> chunk_best(static_cast<std::size_t>(n_chunks));

#pragma omp parallel
    {
        std::vector<int> scratch;
#pragma omp for schedule(dynamic)
        for (long long c = 0; c < n_chunks; ++c) {
            Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(c));
            const long long begin = c * kChunk;
            const long long end = std::min(n_trials, begin + kChunk);
            std::optional<Candidate> best;
            for (long long t = begin; t < end; ++t) {
                Candidate cand;
                cand.genome = sample_subset(rng, scratch, n_total, n_elements);
                cand.obj = evaluate_objectives(grid, cand.genome, wavelength_mm, cell_size);
                if (!best || better(cand, *best)) best = std::move(cand);
            }
            chunk_best[static_cast<std::size_t>(c)] = std::move(best);
        }
    }

    std::optional<Candidate> best;
    for (auto& cb : chunk_best) {
        if (!cb) continue;
        if (!best || better(*cb, *best)) best = std::move(*cb);
    }
    if (!best || !best->obj.feasible)
        throw InfeasibleError("random search found no layout with a two-dimensional aperture");

    RandomSearchResult result;
    result.layout.grid_name = grid.name;
    result.layout.indices = std::move(best->genome);
    result.objectives = best->obj;
    result.trials = n_trials;
    return result;
}

void GaParams::validate() const {
    if (population < 4 || population % 2 != 0)
        throw ValidationError("population must be even and at least 4");
    if (generations < 1) throw ValidationError("generations must be at least 1");
    if (crossover_fraction < 0.0 || crossover_fraction > 1.0)
        throw ValidationError("crossover fraction must be in [0, 1]");
    if (pareto_fraction <= 0.0 || pareto_fraction > 1.0)
        throw ValidationError("pareto fraction must be in (0, 1]");
    if (mutation_rate > 1.0) throw ValidationError("mutation rate must not exceed 1");
    if (checkpoint_every < 0) throw ValidationError("checkpoint interval must be non-negative");
    if (checkpoint_every > 0 && checkpoint_path.empty())
        throw ValidationError("checkpointing requires a checkpoint path");
}

GaResult ga_multiobjective(const geometry::PositionGrid& grid, int n_elements,
                           const GaParams& params, double wavelength_mm, double cell_size) {
    params.validate();
    const int n_total = static_cast<int>(grid.slots.size());
    if (n_elements < 2) throw ValidationError("layout needs at least 2 elements");
    if (n_elements > n_total)
        throw ValidationError("cannot select " + std::to_string(n_elements) + " of " +
                              std::to_string(n_total) + " grid slots");
    const double mutation =
        params.mutation_rate < 0.0 ? 2.0 / static_cast<double>(n_elements) : params.mutation_rate;

    GaState st;
    if (!params.resume_from.empty()) {
        st = load_checkpoint(params.resume_from, params, grid.name, n_elements);
        evaluate_population(grid, wavelength_mm, cell_size, st.pop); // not counted again
        annotate(st.pop);
    } else {
        st.rng = Rng(params.seed);
        std::vector<int> scratch;
        std::vector<Individual> initial;
        initial.reserve(static_cast<std::size_t>(params.population));
        for (int i = 0; i < params.population; ++i)
            initial.push_back({sample_subset(st.rng, scratch, n_total, n_elements), {}, 0, 0.0});
        evaluate_population(grid, wavelength_mm, cell_size, initial);
        st.evaluations = params.population;
        st.pop = select_survivors(initial, params.population);
        annotate(st.pop);
        st.history.push_back(make_history_entry(0, st.pop));
    }

    for (int g = st.generation + 1; g <= params.generations; ++g) {
        auto children = breed(st.rng, st.pop, n_total, params.crossover_fraction, mutation);
        evaluate_population(grid, wavelength_mm, cell_size, children);
        st.evaluations += static_cast<long long>(children.size());
        std::vector<Individual> combined = st.pop;
        combined.insert(combined.end(), std::make_move_iterator(children.begin()),
                        std::make_move_iterator(children.end()));
        st.pop = select_survivors(combined, params.population);
        annotate(st.pop);
        st.generation = g;
        st.history.push_back(make_history_entry(g, st.pop));
        if (params.checkpoint_every > 0 && g % params.checkpoint_every == 0)
            write_checkpoint(params.checkpoint_path, st, params, grid.name, n_elements, mutation);
    }

    // Final front: feasible members only, deduplicated, rank-1, truncated to
    // ceil(pareto_fraction * population) by crowding.
    std::vector<Individual> feasible_pool;
    for (const auto& ind : st.pop)
        if (ind.obj.feasible) feasible_pool.push_back(ind);
    std::vector<Individual> feasible;
    for (auto i : stable_distinct_indices(feasible_pool)) feasible.push_back(feasible_pool[i]);
    if (feasible.empty())
        throw InfeasibleError(
            "every layout in the final population has a degenerate aperture axis");

    std::vector<ObjectiveVector> objs(feasible.size());
    for (std::size_t i = 0; i < feasible.size(); ++i) objs[i] = feasible[i].obj;
    const auto fronts = nondominated_sort(objs);
    const auto& first = fronts.front();
    std::vector<ObjectiveVector> front_objs;
    front_objs.reserve(first.size());
    for (auto idx : first) front_objs.push_back(objs[idx]);
    const auto crowd = crowding_distances(front_objs);

    const auto cap = static_cast<std::size_t>(std::ceil(
        params.pareto_fraction * static_cast<double>(params.population)));
    std::vector<std::size_t> order(first.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    if (order.size() > cap) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
            if (objective_lex_less(front_objs[a], front_objs[b])) return true;
            if (objective_lex_less(front_objs[b], front_objs[a])) return false;
            return feasible[first[a]].genome < feasible[first[b]].genome;
        });
        order.resize(cap);
    }

    GaResult result;
    result.history = std::move(st.history);
    result.evaluations = st.evaluations;
    for (auto k : order) {
        ParetoSolution sol;
        sol.layout.grid_name = grid.name;
        sol.layout.indices = feasible[first[k]].genome;
        sol.objectives = feasible[first[k]].obj;
        result.front.push_back(std::move(sol));
    }
    std::sort(result.front.begin(), result.front.end(), preferred);
    return result;
}

const ParetoSolution& select_final(const std::vector<ParetoSolution>& front) {
    if (front.empty()) throw ValidationError("cannot select from an empty front");
    const ParetoSolution* best = &front.front();
    for (const auto& s : front)
        if (preferred(s, *best)) best = &s;
    return *best;
}

std::string ga_report_json(const GaResult& result, const GaParams& params,
                           const geometry::PositionGrid& grid, int n_elements) {
    const double mutation =
        params.mutation_rate < 0.0 ? 2.0 / static_cast<double>(n_elements) : params.mutation_rate;
    nlohmann::json j;
    j["mode"] = "ga";
    j["grid"] = grid.name;
    j["n_elements"] = n_elements;
    j["params"] = params_json(params, mutation);
    j["evaluations"] = result.evaluations;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : result.history)
        hist.push_back({{"generation", h.generation},
                        {"best_unique", h.best_unique},
                        {"mean_unique", h.mean_unique}});
    j["history"] = std::move(hist);
    nlohmann::json front = nlohmann::json::array();
    for (const auto& s : result.front) front.push_back(solution_json(s));
    j["front"] = std::move(front);
    if (!result.front.empty()) j["selected"] = solution_json(select_final(result.front));
    return j.dump(2) + "\n";
}

std::string random_report_json(const RandomSearchResult& result,
                               const geometry::PositionGrid& grid, int n_elements,
                               std::uint64_t seed) {
    nlohmann::json j;
    j["mode"] = "random";
    j["grid"] = grid.name;
    j["n_elements"] = n_elements;
    j["seed"] = seed;
    j["trials"] = result.trials;
    ParetoSolution s{result.layout, result.objectives};
    j["best"] = solution_json(s);
    return j.dump(2) + "\n";
}

} // namespace aim::optimize
