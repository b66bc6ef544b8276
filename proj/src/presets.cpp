#include "kroncirc/presets.hpp"

#include <charconv>

namespace kroncirc {

namespace {

SparseMatrix two_by_two(const FieldElement& a, const FieldElement& b, const FieldElement& c,
                        const FieldElement& d) {
    std::vector<SparseMatrix::Entry> es;
    if (!a.is_zero()) es.push_back({0, 0, a});
    if (!b.is_zero()) es.push_back({0, 1, b});
    if (!c.is_zero()) es.push_back({1, 0, c});
    if (!d.is_zero()) es.push_back({1, 1, d});
    return SparseMatrix::from_triplets(2, 2, a.spec(), std::move(es));
}

int parse_power(std::string_view body, const std::string& name) {
    int k = -1;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), k);
    if (ec != std::errc() || ptr != body.data() + body.size() || k < 1 || k > 24) {
        throw InvalidInputError("bad base preset: " + name);
    }
    return k;
}

}  // namespace

SparseMatrix walsh_hadamard(int k, const FieldSpec& field) {
    FieldElement one = FieldElement::one(field);
    return kron_power(two_by_two(one, one, one, -one), k);
}

SparseMatrix disjointness(int k, const FieldSpec& field) {
    FieldElement one = FieldElement::one(field);
    return kron_power(two_by_two(one, one, one, FieldElement::zero(field)), k);
}

SparseMatrix omega_base(const FieldElement& w) {
    FieldElement one = FieldElement::one(w.spec());
    return two_by_two(one, one, one, w);
}

BaseSpec parse_base(const std::string& name, const FieldSpec& field) {
    if (name.size() >= 2 && (name[0] == 'h' || name[0] == 'r' || name[0] == 'i') &&
        name.find(':') == std::string::npos) {
        int k = parse_power(std::string_view(name).substr(1), name);
        SparseMatrix elem;
        switch (name[0]) {
            case 'h': elem = walsh_hadamard(1, field); break;
            case 'r': elem = disjointness(1, field); break;
            default: elem = SparseMatrix::identity(2, field); break;
        }
        return BaseSpec{name, kron_power(elem, k), elem, k};
    }
    if (name.rfind("omega:", 0) == 0) {
        FieldElement w = FieldElement::parse(field, name.substr(6));
        SparseMatrix m = omega_base(w);
        return BaseSpec{name, m, m, 1};
    }
    if (name.rfind("file:", 0) == 0) {
        SparseMatrix m = smx_load(name.substr(5));
        if (m.rows() != m.cols()) throw InvalidInputError("base matrix must be square: " + name);
        return BaseSpec{name, m, m, 1};
    }
    throw InvalidInputError("unrecognized base preset: " + name);
}

}  // namespace kroncirc
