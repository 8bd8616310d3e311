#pragma once

// Four-state pathfinding Markov chain:
//   0 Gate Closed, 1 Pathfinder Selection, 2 Pathfinding, 3 Gate Opened.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathfinder/error.hpp"

namespace pathfinder {

inline constexpr int kNumStates = 4;

enum class GateState : int {
    closed = 0,
    selection = 1,
    pathfinding = 2,
    opened = 3,
};

class ChainParams {
public:
    /// Throws ErrorCode::invalid_argument unless every field is in [0,1].
    ChainParams(double p_good, double p_accept, double p_success);

    double p_good() const noexcept { return p_good_; }
    double p_accept() const noexcept { return p_accept_; }
    double p_success() const noexcept { return p_success_; }

private:
    double p_good_;
    double p_accept_;
    double p_success_;
};

using Row = std::array<double, kNumStates>;

class TransitionMatrix {
public:
    /// Validates row sums (1e-12), entry range and the structural zero pattern.
    explicit TransitionMatrix(const std::array<Row, kNumStates>& rows);

    double operator()(int from, int to) const { return rows_[from][to]; }
    const Row& row(int from) const { return rows_[from]; }
    const std::array<Row, kNumStates>& rows() const noexcept { return rows_; }

private:
    std::array<Row, kNumStates> rows_;
};

struct SteadyState {
    std::array<double, kNumStates> pi{};

    double operator[](int i) const { return pi[i]; }
};

TransitionMatrix build_transition_matrix(const ChainParams& params);

/// Stationary distribution via LU on the balance system with one equation
/// replaced by the normalization row. Throws non_unique_stationary when the
/// chain has more than one closed class.
SteadyState steady_state(const TransitionMatrix& matrix);

inline SteadyState steady_state(const ChainParams& params) {
    return steady_state(build_transition_matrix(params));
}

/// max_j |(pi P)_j - pi_j|
double stationarity_residual(const TransitionMatrix& matrix, const SteadyState& state);

struct SweepRow {
    double p_good;
    double p_accept;
    double p_success;
    std::optional<SteadyState> state;  // empty => non_unique
};

/// Cartesian sweep in lexicographic (g, a, s) order. Degenerate cells are
/// kept as rows with an empty state. Throws empty_grid / invalid_argument.
std::vector<SweepRow> sweep_steady_state(std::span<const double> g_grid,
                                         std::span<const double> a_grid,
                                         std::span<const double> s_grid);

/// Header `p_good,p_accept,p_success,pi0,pi1,pi2,pi3,status`.
std::string sweep_to_csv(std::span<const SweepRow> rows);

}  // namespace pathfinder
