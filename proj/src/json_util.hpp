#pragma once

// Internal helpers for the JSON artifact formats (decompositions, witnesses,
// rectangle partitions, circuit manifests).

#include <json.hpp>

#include "kroncirc/sparse.hpp"

namespace kroncirc {

inline nlohmann::json field_to_json(const FieldSpec& f) {
    nlohmann::json j;
    if (f.kind == FieldKind::rational) {
        j["kind"] = "rational";
    } else {
        j["kind"] = "prime";
        j["modulus"] = f.modulus;
    }
    return j;
}

inline FieldSpec field_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational") return FieldSpec::rationals();
    if (kind == "prime") return FieldSpec::prime(j.at("modulus").get<std::uint64_t>());
    throw InvalidInputError("unknown field kind: " + kind);
}

inline nlohmann::json matrix_to_json(const SparseMatrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["field"] = field_to_json(m.field());
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries()) {
        entries.push_back(nlohmann::json::array({e.row, e.col, e.v.str()}));
    }
    j["entries"] = std::move(entries);
    return j;
}

// SMX-inline form: no field key; the enclosing document carries the field.
inline nlohmann::json matrix_to_json_inline(const SparseMatrix& m) {
    nlohmann::json j = matrix_to_json(m);
    j.erase("field");
    return j;
}

inline SparseMatrix matrix_from_json_inline(const nlohmann::json& j, const FieldSpec& field) {
    std::int64_t rows = j.at("rows").get<std::int64_t>();
    std::int64_t cols = j.at("cols").get<std::int64_t>();
    std::vector<SparseMatrix::Entry> entries;
    for (const auto& e : j.at("entries")) {
        entries.push_back(SparseMatrix::Entry{
            e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(),
            FieldElement::parse(field, e.at(2).get<std::string>())});
    }
    return SparseMatrix::from_triplets(rows, cols, field, std::move(entries));
}

inline SparseMatrix matrix_from_json(const nlohmann::json& j) {
    return matrix_from_json_inline(j, field_from_json(j.at("field")));
}

}  // namespace kroncirc
