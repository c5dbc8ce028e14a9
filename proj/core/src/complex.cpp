#include "parajulia/complex.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <string>

#include "parajulia/error.hpp"

namespace parajulia {

namespace {

[[noreturn]] void fail(std::string_view text, const char* why) {
    throw Error(ErrorCode::ParseError,
                std::string("bad complex literal '") + std::string(text) + "': " + why);
}

// One signed real term, optionally followed by the imaginary unit.
struct Term {
    double value = 0.0;
    bool imaginary = false;
};

bool is_unit(char c) { return c == 'i' || c == 'I' || c == 'j' || c == 'J'; }

Term read_term(const std::string& s, std::size_t& pos, std::string_view original) {
    Term term;
    double sign = 1.0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        sign = s[pos] == '-' ? -1.0 : 1.0;
        ++pos;
    }
    if (pos >= s.size()) {
        fail(original, "dangling sign");
    }
    if (is_unit(s[pos])) {
        term.value = sign;
        term.imaginary = true;
        ++pos;
        return term;
    }
    // Mantissa, optional exponent. An exponent sign must not be mistaken
    // for the separator between real and imaginary parts.
    std::size_t end = pos;
    while (end < s.size() && (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.')) {
        ++end;
    }
    if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
        std::size_t exp = end + 1;
        if (exp < s.size() && (s[exp] == '+' || s[exp] == '-')) {
            ++exp;
        }
        std::size_t digits = exp;
        while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) {
            ++digits;
        }
        if (digits > exp) {
            end = digits;
        }
    }
    if (end == pos) {
        fail(original, "expected a number");
    }
    double magnitude = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + end, magnitude);
    if (ec != std::errc() || ptr != s.data() + end) {
        fail(original, "malformed number");
    }
    pos = end;
    term.value = sign * magnitude;
    if (pos < s.size() && (s[pos] == '*')) {
        ++pos;
    }
    if (pos < s.size() && is_unit(s[pos])) {
        term.imaginary = true;
        ++pos;
    }
    return term;
}

} // namespace

Complex parse_complex(std::string_view text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s.push_back(c);
        }
    }
    if (s.empty()) {
        fail(text, "empty");
    }
    std::size_t pos = 0;
    double re = 0.0;
    double im = 0.0;
    int terms = 0;
    bool seen_re = false;
    bool seen_im = false;
    while (pos < s.size()) {
        if (terms > 0 && s[pos] != '+' && s[pos] != '-') {
            fail(text, "expected '+' or '-' between terms");
        }
        const Term t = read_term(s, pos, text);
        if (t.imaginary) {
            if (seen_im) fail(text, "two imaginary parts");
            im = t.value;
            seen_im = true;
        } else {
            if (seen_re) fail(text, "two real parts");
            re = t.value;
            seen_re = true;
        }
        ++terms;
    }
    return {re, im};
}

std::string format_double(double x) {
    // shortest text that reads back to the same double
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string format_complex(Complex z) {
    std::string out = format_double(z.real());
    const double im = z.imag();
    if (std::signbit(im)) {
        out += "-" + format_double(-im) + "i";
    } else {
        out += "+" + format_double(im) + "i";
    }
    return out;
}

} // namespace parajulia
