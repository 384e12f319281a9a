#include "viltwin/safety/formula.hpp"

#include <cctype>

#include "viltwin/core/error.hpp"

namespace viltwin::safety {

namespace {

class Parser {
public:
    Parser(std::string_view text, std::vector<Formula::Node>& nodes) : s_(text), nodes_(nodes) {}

    int parse() {
        const int root = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("formula '" + std::string(s_) + "': column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    int add(Formula::Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Formula::Op op, int lhs, int rhs) {
        Formula::Node n;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        return add(std::move(n));
    }

    int expr() {
        const int lhs = disjunction();
        if (accept("<->") || accept("↔")) return binary(Formula::Op::iff, lhs, disjunction());
        if (accept("->") || accept("→")) return binary(Formula::Op::implies, lhs, expr());
        return lhs;
    }

    int disjunction() {
        int lhs = conjunction();
        while (accept("|") || accept("∨")) lhs = binary(Formula::Op::disj, lhs, conjunction());
        return lhs;
    }

    int conjunction() {
        int lhs = unary();
        while (accept("&") || accept("∧")) lhs = binary(Formula::Op::conj, lhs, unary());
        return lhs;
    }

    int unary() {
        if (accept("!") || accept("¬")) {
            Formula::Node n;
            n.op = Formula::Op::negate;
            n.lhs = unary();
            return add(std::move(n));
        }
        return atom();
    }

    int atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of formula");
        if (accept("(")) {
            const int inner = expr();
            if (!accept(")")) fail("expected ')'");
            return inner;
        }
        const char c = s_[pos_];
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail("expected a variable or '('");
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name(s_.substr(start, pos_ - start));
        Formula::Node n;
        if (name == "true" || name == "false") {
            n.op = Formula::Op::constant;
            n.value = name == "true";
            return add(std::move(n));
        }
        n.op = Formula::Op::var;
        n.name = name;
        n.primed = pos_ < s_.size() && s_[pos_] == '\'';
        if (n.primed) ++pos_;
        return add(std::move(n));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Formula::Node>& nodes_;
};

}  // namespace

Formula Formula::parse(std::string_view text) {
    Formula f;
    f.text_ = std::string(text);
    f.root_ = Parser(text, f.nodes_).parse();
    return f;
}

std::vector<Formula::VarUse> Formula::variables() const {
    std::vector<VarUse> out;
    for (const auto& n : nodes_) {
        if (n.op != Op::var) continue;
        VarUse* use = nullptr;
        for (auto& u : out) {
            if (u.name == n.name) use = &u;
        }
        if (!use) {
            out.push_back({n.name, false, false});
            use = &out.back();
        }
        (n.primed ? use->primed : use->current) = true;
    }
    return out;
}

bool Formula::eval_node(int i, std::uint64_t cur, std::uint64_t next) const {
    const Node& n = nodes_[i];
    switch (n.op) {
        case Op::constant:
            return n.value;
        case Op::var:
            if (n.var < 0) throw ValidationError("variable '" + n.name + "' is not bound");
            return ((n.primed ? next : cur) >> n.var) & 1U;
        case Op::negate:
            return !eval_node(n.lhs, cur, next);
        case Op::conj:
            return eval_node(n.lhs, cur, next) && eval_node(n.rhs, cur, next);
        case Op::disj:
            return eval_node(n.lhs, cur, next) || eval_node(n.rhs, cur, next);
        case Op::implies:
            return !eval_node(n.lhs, cur, next) || eval_node(n.rhs, cur, next);
        case Op::iff:
            return eval_node(n.lhs, cur, next) == eval_node(n.rhs, cur, next);
    }
    return false;
}

}  // namespace viltwin::safety
