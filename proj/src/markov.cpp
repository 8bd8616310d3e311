#include "pathfinder/markov.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "pathfinder/numeric.hpp"

namespace pathfinder {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kPivotTolerance = 1e-12;
constexpr double kClampFloor = -1e-12;

constexpr std::array<std::pair<int, int>, 8> kStructuralZeros{{
    {0, 2}, {0, 3}, {1, 0}, {1, 3}, {2, 1}, {2, 2}, {3, 1}, {3, 2},
}};

void check_probability(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        std::ostringstream msg;
        msg << name << " must lie in [0,1], got " << value;
        fail(ErrorCode::invalid_argument, msg.str());
    }
}

}  // namespace

ChainParams::ChainParams(double p_good, double p_accept, double p_success)
    : p_good_(p_good), p_accept_(p_accept), p_success_(p_success) {
    check_probability(p_good, "p_good");
    check_probability(p_accept, "p_accept");
    check_probability(p_success, "p_success");
}

TransitionMatrix::TransitionMatrix(const std::array<Row, kNumStates>& rows) : rows_(rows) {
    for (int i = 0; i < kNumStates; ++i) {
        double sum = 0.0;
        for (int j = 0; j < kNumStates; ++j) {
            check_probability(rows_[i][j], "transition entry");
            sum += rows_[i][j];
        }
        require(std::abs(sum - 1.0) <= kRowSumTolerance, ErrorCode::invalid_argument,
                "transition row " + std::to_string(i) + " does not sum to 1");
    }
    for (const auto& [i, j] : kStructuralZeros) {
        require(rows_[i][j] == 0.0, ErrorCode::invalid_argument,
                "entry (" + std::to_string(i) + "," + std::to_string(j) + ") must be structurally zero");
    }
}

TransitionMatrix build_transition_matrix(const ChainParams& params) {
    const double g = params.p_good();
    const double a = params.p_accept();
    const double s = params.p_success();
    return TransitionMatrix({{
        {1.0 - g, g, 0.0, 0.0},
        {0.0, 1.0 - a, a, 0.0},
        {1.0 - s, 0.0, 0.0, s},
        {1.0 - g, 0.0, 0.0, g},
    }});
}

SteadyState steady_state(const TransitionMatrix& matrix) {
    // Rows of (P^T - I) always sum to zero, so when the chain has a single
    // closed class any three of them are independent. Replacing the last one
    // by the normalization row gives a system that is nonsingular exactly when
    // the stationary distribution is unique.
    std::array<std::array<double, kNumStates>, kNumStates> lu{};
    std::array<double, kNumStates> rhs{};
    for (int i = 0; i < kNumStates - 1; ++i) {
        for (int j = 0; j < kNumStates; ++j) {
            lu[i][j] = matrix(j, i) - (i == j ? 1.0 : 0.0);
        }
    }
    lu[kNumStates - 1].fill(1.0);
    rhs[kNumStates - 1] = 1.0;

    for (int col = 0; col < kNumStates; ++col) {
        int pivot = col;
        for (int r = col + 1; r < kNumStates; ++r) {
            if (std::abs(lu[r][col]) > std::abs(lu[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(lu[pivot][col]) < kPivotTolerance) {
            fail(ErrorCode::non_unique_stationary,
                 "chain is reducible with more than one closed class; stationary distribution is not unique");
        }
        std::swap(lu[pivot], lu[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (int r = col + 1; r < kNumStates; ++r) {
            const double factor = lu[r][col] / lu[col][col];
            lu[r][col] = factor;
            for (int c = col + 1; c < kNumStates; ++c) {
                lu[r][c] -= factor * lu[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    SteadyState out;
    for (int i = kNumStates - 1; i >= 0; --i) {
        double acc = rhs[i];
        for (int c = i + 1; c < kNumStates; ++c) {
            acc -= lu[i][c] * out.pi[c];
        }
        out.pi[i] = acc / lu[i][i];
    }

    double total = 0.0;
    for (double& p : out.pi) {
        if (p < 0.0) {
            require(p >= kClampFloor, ErrorCode::numerical, "stationary solve produced a negative probability");
            p = 0.0;
        }
        total += p;
    }
    for (double& p : out.pi) {
        p /= total;
    }
    return out;
}

double stationarity_residual(const TransitionMatrix& matrix, const SteadyState& state) {
    double worst = 0.0;
    for (int j = 0; j < kNumStates; ++j) {
        double flow = 0.0;
        for (int i = 0; i < kNumStates; ++i) {
            flow += state.pi[i] * matrix(i, j);
        }
        worst = std::max(worst, std::abs(flow - state.pi[j]));
    }
    return worst;
}

std::vector<SweepRow> sweep_steady_state(std::span<const double> g_grid,
                                         std::span<const double> a_grid,
                                         std::span<const double> s_grid) {
    require(!g_grid.empty() && !a_grid.empty() && !s_grid.empty(), ErrorCode::empty_grid,
            "steady-state sweep needs non-empty p_good, p_accept and p_success grids");

    std::vector<SweepRow> rows;
    rows.reserve(g_grid.size() * a_grid.size() * s_grid.size());
    for (double g : g_grid) {
        for (double a : a_grid) {
            for (double s : s_grid) {
                ChainParams checked(g, a, s);  // validates before any work is scheduled
                rows.push_back({g, a, s, std::nullopt});
            }
        }
    }
    parallel_for(rows.size(), [&rows](std::size_t i) {
        auto& row = rows[i];
        try {
            row.state = steady_state(ChainParams(row.p_good, row.p_accept, row.p_success));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::non_unique_stationary) {
                throw;
            }
        }
    });
    return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::string out = "p_good,p_accept,p_success,pi0,pi1,pi2,pi3,status\n";
    for (const auto& row : rows) {
        out += format_float(row.p_good) + ',' + format_float(row.p_accept) + ',' + format_float(row.p_success);
        if (row.state) {
            for (double p : row.state->pi) {
                out += ',' + format_float(p);
            }
            out += ",ok\n";
        } else {
            out += ",,,,,non_unique\n";
        }
    }
    return out;
}

}  // namespace pathfinder
