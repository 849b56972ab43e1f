#pragma once

// Ideal files: a "ring:" header naming the variables and coefficient domain,
// an "order:" line, then one polynomial per line in the poly grammar.
//
//   ring: a20 a11 b20 over Q
//   order: degrevlex
//   a20^2 + a11*b20
//   ...
//
// Domains: Q, Qi, Fp(<p>), Fpi(<p>). Orders: lex, degrevlex, block(<k>).
// Blank lines and # comments are skipped anywhere.

#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "groebner.hpp"

namespace isochron {

using IdealVariant = std::variant<Ideal<BigRational>, Ideal<GaussianRational>,
                                  Ideal<PrimeFieldElement>, Ideal<GaussianPrimeElement>>;

namespace iodetail {

inline std::string strip_line(const std::string& raw) {
    std::string s = raw;
    auto h = s.find('#');
    if (h != std::string::npos) s.erase(h);
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

template <class C>
IdealVariant parse_polys(RingPtr R, const std::vector<std::pair<std::string, std::size_t>>& body) {
    Ideal<C> I{R, {}};
    for (auto& [text, line] : body) {
        try {
            I.gens.push_back(parse_polynomial<C>(text, R));
        } catch (const ParseError& e) {
            throw ParseError(e.msg, line, e.column);
        }
    }
    return I;
}

}  // namespace iodetail

inline std::optional<MonomialOrder> order_from_str(const std::string& s) {
    if (s == "lex") return MonomialOrder::lex();
    if (s == "degrevlex") return MonomialOrder::degrevlex();
    if (s.rfind("block(", 0) == 0 && s.back() == ')')
        return MonomialOrder::block(std::stoul(s.substr(6, s.size() - 7)));
    return std::nullopt;
}

inline IdealVariant parse_ideal_file(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::vector<std::pair<std::string, std::size_t>> lines;  // content, source line
    for (std::size_t n = 1; std::getline(in, raw); ++n) {
        std::string s = iodetail::strip_line(raw);
        if (!s.empty()) lines.emplace_back(s, n);
    }
    if (lines.size() < 2 || lines[0].first.rfind("ring:", 0) != 0)
        throw ParseError("expected 'ring: <vars> over <domain>' header", 1, 1);

    auto head = iodetail::tokens(lines[0].first.substr(5));
    if (head.size() < 3 || head[head.size() - 2] != "over")
        throw ParseError("expected 'ring: <vars> over <domain>'", lines[0].second, 1);
    std::vector<std::string> vars(head.begin(), head.end() - 2);
    std::string dom = head.back();

    if (lines[1].first.rfind("order:", 0) != 0)
        throw ParseError("expected 'order: lex|degrevlex|block(<k>)'", lines[1].second, 1);
    auto ords = iodetail::tokens(lines[1].first.substr(6));
    if (ords.size() != 1)
        throw ParseError("expected a single order token", lines[1].second, 1);
    auto order = order_from_str(ords[0]);
    if (!order) throw ParseError("unknown order '" + ords[0] + "'", lines[1].second, 1);

    std::vector<std::pair<std::string, std::size_t>> body(lines.begin() + 2, lines.end());
    auto modulus_of = [&](const std::string& d, std::size_t off) -> std::uint64_t {
        if (d.back() != ')') throw ParseError("expected '" + d.substr(0, off) + "(<p>)'",
                                              lines[0].second, 1);
        return std::stoull(d.substr(off, d.size() - off - 1));
    };

    if (dom == "Q") {
        RingPtr R = make_ring(vars, *order, DomainKind::Q);
        return iodetail::parse_polys<BigRational>(R, body);
    }
    if (dom == "Qi") {
        RingPtr R = make_ring(vars, *order, DomainKind::Qi);
        return iodetail::parse_polys<GaussianRational>(R, body);
    }
    if (dom.rfind("Fp(", 0) == 0) {
        RingPtr R = make_ring(vars, *order, DomainKind::Fp, modulus_of(dom, 3));
        return iodetail::parse_polys<PrimeFieldElement>(R, body);
    }
    if (dom.rfind("Fpi(", 0) == 0) {
        RingPtr R = make_ring(vars, *order, DomainKind::Fpi, modulus_of(dom, 4));
        return iodetail::parse_polys<GaussianPrimeElement>(R, body);
    }
    throw ParseError("unknown domain '" + dom + "'", lines[0].second, 1);
}

template <class C>
std::string domain_tag(const Ring& r) {
    switch (r.domain) {
        case DomainKind::Q: return "Q";
        case DomainKind::Qi: return "Qi";
        case DomainKind::Fp: return "Fp(" + std::to_string(r.modulus) + ")";
        case DomainKind::Fpi: return "Fpi(" + std::to_string(r.modulus) + ")";
        case DomainKind::C: break;
    }
    throw Error("domain has no file tag");
}

// Round-trips through parse_ideal_file.
template <class C>
std::string ideal_file_str(const Ideal<C>& I) {
    std::string out = "ring:";
    for (auto& v : I.ring->vars) out += " " + v;
    out += " over " + domain_tag<C>(*I.ring) + "\n";
    out += "order: " + I.ring->order.str() + "\n";
    for (auto& g : I.gens) out += g.str() + "\n";
    return out;
}

}  // namespace isochron
