#include "viltwin/safety/bounded_check.hpp"

#include "viltwin/core/error.hpp"

namespace viltwin::safety {

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::initial:
            return "initial";
        case Violation::Kind::safety:
            return "safety";
        case Violation::Kind::justice:
            return "justice";
        case Violation::Kind::undefined:
            return "undefined";
    }
    return "unknown";
}

namespace {

class Checker {
public:
    Checker(const Strategy& st, const CompiledSpec& cs, int horizon) : st_(st), cs_(cs), horizon_(horizon) {}

    CheckReport run() {
        for (std::uint32_t e = 0; e < cs_.env_count(); ++e) {
            if (!cs_.env_init(e)) continue;
            const std::int32_t s0 = st_.init_sys(e);
            if (s0 < 0) {
                record_safety(Violation::Kind::undefined, {{e, 0, 0}}, 0, "", "no initial system valuation");
                continue;
            }
            const auto s = static_cast<std::uint32_t>(s0);
            if (!cs_.sys_init(e, s)) {
                record_safety(Violation::Kind::initial, {{e, s, 0}}, 0, "", "initial valuation violates sys_init");
            }
            path_.clear();
            path_.push_back({e, s, 0});
            dfs();
        }
        return report_;
    }

private:
    void record_safety(Violation::Kind kind, std::vector<TracePoint> trace, std::size_t step, std::string constraint,
                       std::string message) {
        if (report_.safety) return;
        Violation v;
        v.kind = kind;
        v.trace = std::move(trace);
        v.step = step;
        v.constraint = std::move(constraint);
        v.message = std::move(message);
        report_.safety = std::move(v);
    }

    void check_lasso() {
        if (report_.justice) return;
        const TracePoint& last = path_.back();
        for (std::size_t l = 0; l + 1 < path_.size(); ++l) {
            const TracePoint& p = path_[l];
            if (p.env != last.env || p.sys != last.sys || p.goal != last.goal) continue;
            // Loop is path_[l .. size-2], closing back to path_[l].
            for (std::size_t i = 0; i < cs_.env_justice_count(); ++i) {
                bool seen = false;
                for (std::size_t k = l; k + 1 < path_.size() && !seen; ++k) {
                    seen = cs_.env_justice(i, path_[k].env, path_[k].sys);
                }
                if (!seen) return;  // unfair loop: the environment is to blame
            }
            for (std::size_t j = 0; j < cs_.sys_justice_count(); ++j) {
                bool seen = false;
                for (std::size_t k = l; k + 1 < path_.size() && !seen; ++k) {
                    seen = cs_.sys_justice(j, path_[k].env, path_[k].sys);
                }
                if (!seen) {
                    Violation v;
                    v.kind = Violation::Kind::justice;
                    v.trace = path_;
                    v.step = path_.size() - 1;
                    v.loop_start = l;
                    v.constraint = cs_.source().sys_justice[j];
                    v.message = "fair loop never satisfies system justice";
                    report_.justice = std::move(v);
                    return;
                }
            }
            return;
        }
    }

    void dfs() {
        check_lasso();
        if (static_cast<int>(path_.size()) >= horizon_) {
            ++report_.words;
            // The last input still produces an output; it must be safe for every admissible next input.
            const TracePoint cur = path_.back();
            const std::int32_t s2 = st_.next_sys(cur.sys, cur.goal, cur.env);
            if (s2 < 0) {
                record_safety(Violation::Kind::undefined, path_, path_.size() - 1, "", "strategy has no move");
                return;
            }
            for (std::uint32_t e2 = 0; e2 < cs_.env_count(); ++e2) {
                if (!cs_.env_trans(cur.env, cur.sys, e2)) continue;
                const int bad = cs_.first_sys_violation(cur.env, cur.sys, e2, static_cast<std::uint32_t>(s2));
                if (bad >= 0) {
                    auto trace = path_;
                    trace.push_back({e2, static_cast<std::uint32_t>(s2), 0});
                    record_safety(Violation::Kind::safety, trace, trace.size() - 1, cs_.source().sys_safety[bad],
                                  "system transition violated");
                    return;
                }
            }
            return;
        }
        const TracePoint cur = path_.back();
        const std::int32_t s2 = st_.next_sys(cur.sys, cur.goal, cur.env);
        if (s2 < 0) {
            record_safety(Violation::Kind::undefined, path_, path_.size() - 1, "", "strategy has no move");
            return;
        }
        const std::int32_t g2 = st_.next_goal(cur.sys, cur.goal, cur.env);
        for (std::uint32_t e2 = 0; e2 < cs_.env_count(); ++e2) {
            if (!cs_.env_trans(cur.env, cur.sys, e2)) continue;
            const auto s = static_cast<std::uint32_t>(s2);
            path_.push_back({e2, s, g2});
            const int bad = cs_.first_sys_violation(cur.env, cur.sys, e2, s);
            if (bad >= 0) {
                record_safety(Violation::Kind::safety, path_, path_.size() - 1, cs_.source().sys_safety[bad],
                              "system transition violated");
            }
            dfs();
            path_.pop_back();
        }
    }

    const Strategy& st_;
    const CompiledSpec& cs_;
    int horizon_;
    std::vector<TracePoint> path_;
    CheckReport report_;
};

}  // namespace

CheckReport bounded_check(const Strategy& strategy, const Gr1Spec& spec, int horizon) {
    if (horizon < 1 || horizon > kMaxCheckHorizon) {
        throw ValidationError("horizon must be between 1 and " + std::to_string(kMaxCheckHorizon));
    }
    if (!(strategy.spec().env_vars == spec.env_vars && strategy.spec().sys_vars == spec.sys_vars)) {
        throw ValidationError("strategy and spec declare different variables");
    }
    const CompiledSpec cs(spec);
    return Checker(strategy, cs, horizon).run();
}

}  // namespace viltwin::safety
