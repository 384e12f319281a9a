#include "viltwin/safety/gr1_solver.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "viltwin/core/error.hpp"

namespace viltwin::safety {

namespace {

using Set = std::vector<char>;

constexpr std::uint64_t kMaxRelation = std::uint64_t{1} << 27;

/// Moves available to the system: for position p and candidate s', the list
/// of successor positions the environment may pick, or nothing if s' breaks
/// a system safety constraint for some admissible e'.
class Game {
public:
    explicit Game(const CompiledSpec& cs) : cs_(cs), P_(cs.position_count()), S_(cs.sys_count()), E_(cs.env_count()) {
        if (P_ * S_ * E_ > kMaxRelation) {
            throw ValidationError("transition relation too large for explicit enumeration (" +
                                  std::to_string(P_ * S_ * E_) + " entries)");
        }
        start_.assign(P_ * S_ + 1, 0);
        valid_.assign(P_ * S_, 0);
        std::vector<std::uint32_t> env_next;
        for (std::uint64_t p = 0; p < P_; ++p) {
            const auto e = static_cast<std::uint32_t>(p & (E_ - 1));
            const auto s = static_cast<std::uint32_t>(p >> cs.env_bits());
            env_next.clear();
            for (std::uint32_t e2 = 0; e2 < E_; ++e2) {
                if (cs.env_trans(e, s, e2)) env_next.push_back(e2);
            }
            for (std::uint32_t s2 = 0; s2 < S_; ++s2) {
                const std::uint64_t k = p * S_ + s2;
                start_[k] = next_.size();
                bool ok = true;
                for (auto e2 : env_next) {
                    if (!cs.sys_trans(e, s, e2, s2)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    valid_[k] = 1;
                    for (auto e2 : env_next) next_.push_back(cs.join(e2, s2));
                }
            }
        }
        start_[P_ * S_] = next_.size();
    }

    std::uint64_t positions() const { return P_; }

    /// Lowest s' from p whose every admissible successor lies in `target`, or -1.
    std::int32_t move_into(std::uint64_t p, const Set& target) const {
        for (std::uint32_t s2 = 0; s2 < S_; ++s2) {
            const std::uint64_t k = p * S_ + s2;
            if (!valid_[k]) continue;
            bool all = true;
            for (std::uint64_t q = start_[k]; q < start_[k + 1]; ++q) {
                if (!target[next_[q]]) {
                    all = false;
                    break;
                }
            }
            if (all) return static_cast<std::int32_t>(s2);
        }
        return -1;
    }

    Set cpre(const Set& target) const {
        Set out(P_, 0);
        for (std::uint64_t p = 0; p < P_; ++p) out[p] = move_into(p, target) >= 0;
        return out;
    }

private:
    const CompiledSpec& cs_;
    std::uint64_t P_, S_, E_;
    std::vector<std::uint64_t> start_;
    std::vector<char> valid_;
    std::vector<std::uint64_t> next_;
};

Set set_and(const Set& a, const Set& b) {
    Set out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
    return out;
}

Set set_or(const Set& a, const Set& b) {
    Set out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] || b[i];
    return out;
}

/// mu Y for one system goal, with every layer kept for strategy extraction.
struct GoalLayers {
    std::vector<Set> y;               // y[r] = Y after r rounds, y[0] empty
    std::vector<std::vector<Set>> x;  // x[r][i], r >= 1 (x[0] unused)
};

GoalLayers solve_goal(const Game& g, const Set& Z, const Set& goal, const std::vector<Set>& env_not_just) {
    const auto P = g.positions();
    GoalLayers L;
    L.y.push_back(Set(P, 0));
    L.x.emplace_back();
    const Set reach_goal = set_and(goal, g.cpre(Z));
    while (true) {
        const Set start = set_or(reach_goal, g.cpre(L.y.back()));
        Set y_new(P, 0);
        std::vector<Set> xs;
        for (const Set& avoid : env_not_just) {
            Set X(P, 1);
            while (true) {
                Set X2 = set_or(start, set_and(avoid, g.cpre(X)));
                if (X2 == X) break;
                X = std::move(X2);
            }
            y_new = set_or(y_new, X);
            xs.push_back(std::move(X));
        }
        if (y_new == L.y.back()) break;
        L.y.push_back(std::move(y_new));
        L.x.push_back(std::move(xs));
    }
    return L;
}

}  // namespace

SolveResult solve_gr1(const Gr1Spec& spec) {
    const CompiledSpec cs(spec);
    const Game game(cs);
    const auto P = game.positions();
    const std::size_t m = cs.sys_justice_count();
    const std::size_t n = cs.env_justice_count();

    std::vector<Set> goal(m, Set(P, 0));
    std::vector<Set> env_not_just(n, Set(P, 0));
    for (std::uint64_t p = 0; p < P; ++p) {
        const auto e = static_cast<std::uint32_t>(p & (cs.env_count() - 1));
        const auto s = static_cast<std::uint32_t>(p >> cs.env_bits());
        for (std::size_t j = 0; j < m; ++j) goal[j][p] = cs.sys_justice(j, e, s);
        for (std::size_t i = 0; i < n; ++i) env_not_just[i][p] = !cs.env_justice(i, e, s);
    }

    SolveResult result;
    Set Z(P, 1);
    std::vector<GoalLayers> layers;
    while (true) {
        ++result.iterations;
        layers.clear();
        Set Z2(P, 1);
        for (std::size_t j = 0; j < m; ++j) {
            layers.push_back(solve_goal(game, Z, goal[j], env_not_just));
            Z2 = set_and(Z2, layers.back().y.back());
        }
        if (Z2 == Z) break;
        Z = std::move(Z2);
    }
    for (char c : Z) result.winning_positions += c ? 1 : 0;

    std::vector<std::int32_t> init(cs.env_count(), -1);
    for (std::uint32_t e = 0; e < cs.env_count(); ++e) {
        if (!cs.env_init(e)) continue;
        for (std::uint32_t s = 0; s < cs.sys_count(); ++s) {
            if (cs.sys_init(e, s) && Z[cs.join(e, s)]) {
                init[e] = static_cast<std::int32_t>(s);
                break;
            }
        }
        if (init[e] < 0) {
            result.realizable = false;
            result.reason = result.winning_positions == 0
                                ? "the winning region is empty"
                                : "no winning initial system valuation for environment input " + cs.describe(e, 0);
            return result;
        }
    }

    const std::size_t size = static_cast<std::size_t>(P) * m;
    std::vector<std::int32_t> next_sys(size, -1), next_goal(size, -1);
    for (std::uint32_t s = 0; s < cs.sys_count(); ++s) {
        for (std::size_t j = 0; j < m; ++j) {
            const GoalLayers& L = layers[j];
            for (std::uint32_t e = 0; e < cs.env_count(); ++e) {
                const std::uint64_t p = cs.join(e, s);
                std::size_t r = 0;
                while (r < L.y.size() && !L.y[r][p]) ++r;
                if (r == L.y.size()) continue;  // outside Y_j
                const std::size_t slot = (static_cast<std::size_t>(s) * m + j) * cs.env_count() + e;
                std::int32_t to = -1;
                std::int32_t to_goal = static_cast<std::int32_t>(j);
                if (goal[j][p]) {
                    to = game.move_into(p, Z);
                    if (to >= 0) to_goal = static_cast<std::int32_t>((j + 1) % m);
                }
                if (to < 0) to = game.move_into(p, L.y[r - 1]);
                for (std::size_t i = 0; to < 0 && i < n; ++i) {
                    if (L.x[r][i][p] && env_not_just[i][p]) to = game.move_into(p, L.x[r][i]);
                }
                if (to < 0) throw std::logic_error("GR(1) strategy extraction found no move for a winning position");
                next_sys[slot] = to;
                next_goal[slot] = to_goal;
            }
        }
    }
    result.realizable = true;
    result.strategy.emplace(spec, static_cast<int>(m), std::move(next_sys), std::move(next_goal), std::move(init));
    return result;
}

}  // namespace viltwin::safety
