#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace viltwin::safety {

/// Boolean formula over current and next-step (primed) variables.
///
/// Grammar, loosest binding first (ASCII or Unicode operators):
///   expr   := or [ ("->" | "→") expr ]  |  or [ ("<->" | "↔") or ]
///   or     := and { ("|" | "∨") and }
///   and    := unary { ("&" | "∧") unary }
///   unary  := ("!" | "¬") unary | atom
///   atom   := "true" | "false" | ident ["'"] | "(" expr ")"
///   ident  := [A-Za-z_][A-Za-z0-9_]*
class Formula {
public:
    enum class Op : std::uint8_t { constant, var, negate, conj, disj, implies, iff };

    struct Node {
        Op op = Op::constant;
        bool value = false;  // constant
        bool primed = false; // var
        int var = -1;        // bit index once bound
        int lhs = -1;
        int rhs = -1;
        std::string name;
    };

    /// Throws ValidationError with the column of the first problem.
    static Formula parse(std::string_view text);

    const std::string& text() const noexcept { return text_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    /// Variable names used, in first-use order, with a flag for primed use.
    struct VarUse {
        std::string name;
        bool current = false;
        bool primed = false;
    };
    std::vector<VarUse> variables() const;

    /// Assigns bit positions; `index_of` maps a name to its bit or -1.
    template <typename F>
    void bind(F&& index_of) {
        for (auto& n : nodes_) {
            if (n.op == Op::var) n.var = index_of(n.name);
        }
    }

    /// Evaluates with bit i of `cur` / `next` holding variable i.
    bool eval(std::uint64_t cur, std::uint64_t next) const { return eval_node(root_, cur, next); }

private:
    bool eval_node(int i, std::uint64_t cur, std::uint64_t next) const;

    std::string text_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace viltwin::safety
