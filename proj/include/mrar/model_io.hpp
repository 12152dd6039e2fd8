#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "mrar/common.hpp"
#include "mrar/datamodel.hpp"

namespace mrar::model_io {

// Text model files: a header naming the model kind and shapes, then named
// row-major tables. Doubles are printed with round-trip precision, so
// save/load is exact.

inline void write_matrix(std::ostream& out, const std::string& name,
                         const Eigen::MatrixXd& m) {
    out << "table " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << double_to_text(m(r, c));
        }
        out << "\n";
    }
}

inline void write_vector(std::ostream& out, const std::string& name,
                         const Eigen::VectorXd& v) {
    write_matrix(out, name, v.transpose());
}

inline Eigen::MatrixXd read_matrix(std::istream& in, const std::string& expected) {
    std::string tag, name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "table" || name != expected)
        throw FormatError("model file: expected table '" + expected + "'");
    Eigen::MatrixXd m(rows, cols);
    std::string tok;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(in >> tok)) throw FormatError("model file: truncated table " + expected);
            m(r, c) = text_to_double(tok);
        }
    return m;
}

inline Eigen::VectorXd read_vector(std::istream& in, const std::string& expected) {
    Eigen::MatrixXd m = read_matrix(in, expected);
    return m.row(0).transpose();
}

inline void write_space(std::ostream& out, const LabelSpace& space) {
    out << "residents " << space.residents << "\nsizes";
    for (int k : space.sizes) out << ' ' << k;
    out << "\n";
    if (!space.activity_names.empty())
        for (int m = 0; m < space.residents; ++m) {
            out << "names";
            for (const auto& n : space.activity_names[m]) out << '\t' << n;
            out << "\n";
        }
}

inline LabelSpace read_space(std::istream& in) {
    LabelSpace space;
    std::string tag;
    if (!(in >> tag >> space.residents) || tag != "residents")
        throw FormatError("model file: expected residents line");
    if (!(in >> tag) || tag != "sizes") throw FormatError("model file: expected sizes line");
    space.sizes.resize(space.residents);
    for (int& k : space.sizes)
        if (!(in >> k)) throw FormatError("model file: truncated sizes line");
    // optional per-resident name lines (tab separated)
    while (in.peek() == '\n') in.get();
    while (in.peek() == 'n') {
        std::string line;
        std::getline(in, line);
        auto fields = split(line, '\t');
        if (fields.empty() || fields[0] != "names") throw FormatError("model file: bad names line");
        space.activity_names.emplace_back(fields.begin() + 1, fields.end());
    }
    if (!space.activity_names.empty() &&
        static_cast<int>(space.activity_names.size()) != space.residents)
        throw FormatError("model file: names lines must cover every resident");
    return space;
}

inline std::string read_kind(std::istream& in) {
    std::string magic, kind;
    int version = 0;
    if (!(in >> magic >> version >> kind) || magic != "mrar-model")
        throw FormatError("not a model file");
    if (version != 1) throw FormatError("unsupported model file version");
    return kind;
}

inline void write_kind(std::ostream& out, const std::string& kind) {
    out << "mrar-model 1 " << kind << "\n";
}

inline std::string peek_kind(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file " + path);
    return read_kind(in);
}

}  // namespace mrar::model_io
