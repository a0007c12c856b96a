#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "seqpred/errors.hpp"

namespace seqpred {

using Symbol = int;

// Finite observation set {0, ..., size-1}.
class Alphabet {
public:
    explicit Alphabet(int size) : size_(size) {
        if (size < 2) throw input_error("alphabet size must be at least 2, got " + std::to_string(size));
    }

    int size() const { return size_; }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.size_ == b.size_; }
    friend bool operator!=(const Alphabet& a, const Alphabet& b) { return a.size_ != b.size_; }

private:
    int size_;
};

inline const Alphabet kBinary{2};

// A finite observed prefix x_1..x_n. Symbols are validated on entry, so a
// History is always consistent with its alphabet.
class History {
public:
    explicit History(Alphabet alphabet) : alphabet_(alphabet) {}

    History(Alphabet alphabet, std::vector<Symbol> symbols)
        : alphabet_(alphabet), symbols_(std::move(symbols)) {
        for (Symbol a : symbols_) validate(a);
    }

    static History of(Alphabet alphabet, std::initializer_list<Symbol> symbols) {
        return History(alphabet, std::vector<Symbol>(symbols));
    }

    const Alphabet& alphabet() const { return alphabet_; }
    int length() const { return static_cast<int>(symbols_.size()); }
    bool empty() const { return symbols_.empty(); }
    const std::vector<Symbol>& symbols() const { return symbols_; }

    // 0-based access: at(0) is x_1.
    Symbol at(int t) const { return symbols_[static_cast<std::size_t>(t)]; }
    Symbol back() const { return symbols_.back(); }

    void push(Symbol a) {
        validate(a);
        symbols_.push_back(a);
    }

    void pop() { symbols_.pop_back(); }

    History extended(Symbol a) const {
        History h(*this);
        h.push(a);
        return h;
    }

    History prefix(int len) const {
        return History(alphabet_, std::vector<Symbol>(symbols_.begin(), symbols_.begin() + len));
    }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (alphabet_.size() > 10 && i > 0) s += ',';
            s += std::to_string(symbols_[i]);
        }
        return s;
    }

    friend bool operator==(const History& a, const History& b) {
        return a.alphabet_ == b.alphabet_ && a.symbols_ == b.symbols_;
    }

private:
    void validate(Symbol a) const {
        if (a < 0 || a >= alphabet_.size())
            throw input_error("symbol " + std::to_string(a) + " outside alphabet of size " +
                              std::to_string(alphabet_.size()));
    }

    Alphabet alphabet_;
    std::vector<Symbol> symbols_;
};

}  // namespace seqpred
