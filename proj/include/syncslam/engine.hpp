#pragma once

#include "syncslam/assoc.hpp"
#include "syncslam/model.hpp"
#include "syncslam/scenario.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace syncslam {

struct MtEstimate {
    Vec2 position{0.0, 0.0};
    double orientation = 0.0;
    Vec2 velocity{0.0, 0.0};
    double bias = 0.0;
};

struct PvaEstimate {
    std::uint64_t key = 0;
    std::size_t bs_index = 1;
    Vec2 position{0.0, 0.0};
    double existence = 0.0;
};

/// MMSE estimates after one time step. `confirmed` holds PVAs with existence > p_cf.
struct Estimates {
    std::size_t step = 0;
    std::vector<MtEstimate> mts;
    std::vector<double> bs_bias;
    std::vector<PvaEstimate> confirmed;
    std::size_t hypotheses = 0;  // K after pruning
};

/// One new-PVA hypothesis created during an MT update, whether kept or discarded.
struct BirthRecord {
    std::uint64_t key = 0;
    std::size_t bs_index = 1;
    std::size_t mt = 0;           // 0-based MT index
    std::size_t measurement = 0;  // 1-based index into that MT's measurement set
    double existence = 0.0;
    bool kept = false;
};

struct EngineState {
    std::size_t time = 0;
    std::vector<MtBelief> mt_beliefs;
    BsBiasBelief bias_beliefs;
    std::vector<PvaHypothesis> pvas;
    std::uint64_t next_key = 1;
    std::size_t created = 0;  // hypotheses ever created, kept or not

    // supports of the uniform bias priors, used while a bias is still broad
    std::vector<std::pair<double, double>> mt_bias_support;
    std::vector<std::pair<double, double>> bs_bias_support;
    std::vector<char> mt_bias_informed;  // set once a bias has seen a measurement update
    std::vector<char> bs_bias_informed;
};

/// Prior beliefs: MT states around the true initial state, biases per the configured prior mode.
/// With the uniform mode MT 1's bias is pinned at the center of its range, fixing the gauge.
[[nodiscard]] EngineState initial_state(const ScenarioConfig& cfg, const GroundTruth& truth);

class Engine {
public:
    Engine(const ScenarioConfig& cfg, EngineState state, std::size_t threads = 1);
    Engine(const ScenarioConfig& cfg, const GroundTruth& truth, std::size_t threads = 1);

    /// Prediction, sequential MT updates, confirmation/pruning and estimate extraction.
    /// `z` holds one measurement set per MT.
    Estimates step(const std::vector<std::vector<Measurement>>& z);

    void predict();
    void update_mt(std::size_t i, const std::vector<Measurement>& z);
    void confirm_and_prune();
    [[nodiscard]] Estimates extract_estimates() const;

    [[nodiscard]] const EngineState& state() const { return state_; }
    [[nodiscard]] EngineState& mutable_state() { return state_; }
    [[nodiscard]] const ScenarioConfig& config() const { return cfg_; }
    /// Births of the most recent step, in creation order.
    [[nodiscard]] const std::vector<BirthRecord>& births() const { return births_; }
    /// Marginals of the most recent MT update.
    [[nodiscard]] const AssociationMarginals& last_marginals() const { return last_marginals_; }

private:
    struct Context;

    void propose_mt_bias(std::size_t i, const Context& ctx, Rng& rng);
    void update_bias(std::size_t j, const Context& ctx, Rng& rng);
    void update_pva(std::size_t k, const Context& ctx);
    void birth(const Context& ctx);

    ScenarioConfig cfg_;
    EngineState state_;
    std::size_t threads_;
    std::vector<BirthRecord> births_;
    AssociationMarginals last_marginals_;
};

}  // namespace syncslam
