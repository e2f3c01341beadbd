#ifndef SMVBS_IO_HPP
#define SMVBS_IO_HPP

// File formats: CSV matrices (row-major, no header, ragged rows rejected)
// and the strict JSON run configuration used by the command-line tool.
// Unknown configuration keys are always an error.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smvbs/distributions.hpp"
#include "smvbs/errors.hpp"
#include "smvbs/kernels.hpp"
#include "smvbs/linalg.hpp"

namespace smvbs {

inline Matrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double value;
            try {
                value = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ConfigError(path + ": not a number: '" + cell + "'");
            }
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) throw ConfigError(path + ": trailing junk in cell '" + cell + "'");
            row.push_back(value);
        }
        if (row.empty()) throw ConfigError(path + ": empty row");
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": empty matrix");
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

inline void write_csv_matrix(const std::string& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out.precision(17);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j) out << ',';
            out << a(i, j);
        }
        out << '\n';
    }
}

namespace io_detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& key : allowed)
            if (item.key() == key) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

// Matrix specification: exactly one of
//   {"isotropic": {"dim": d, "value": v}}
//   {"csv": "path"} | {"dense": [[...], ...]}
//   {"eigen": {"vectors": [[...], ...], "values": [...]}}
inline PsdRankQ parse_psd(const nlohmann::json& spec, const std::string& where) {
    if (!spec.is_object() || spec.size() != 1)
        throw ConfigError(where + ": expected exactly one of isotropic/csv/dense/eigen");
    reject_unknown_keys(spec, {"isotropic", "csv", "dense", "eigen"}, where);
    if (spec.contains("isotropic")) {
        const auto& iso = spec.at("isotropic");
        reject_unknown_keys(iso, {"dim", "value"}, where + ".isotropic");
        return PsdRankQ::isotropic(iso.at("dim").get<Eigen::Index>(), iso.at("value").get<double>());
    }
    if (spec.contains("csv")) return PsdRankQ::from_dense(read_csv_matrix(spec.at("csv").get<std::string>()));
    if (spec.contains("dense")) {
        const auto& rows = spec.at("dense");
        if (!rows.is_array() || rows.empty()) throw ConfigError(where + ".dense: expected rows");
        Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != a.cols())
                throw ConfigError(where + ".dense: ragged rows");
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                a(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
        return PsdRankQ::from_dense(a);
    }
    const auto& eig = spec.at("eigen");
    reject_unknown_keys(eig, {"vectors", "values"}, where + ".eigen");
    const auto& vrows = eig.at("vectors");
    const auto& vals = eig.at("values");
    Matrix vecs(static_cast<Eigen::Index>(vrows.size()), static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
        const auto& row = vrows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != vecs.cols())
            throw ConfigError(where + ".eigen: vectors shape mismatch");
        for (Eigen::Index j = 0; j < vecs.cols(); ++j)
            vecs(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    Vector values(static_cast<Eigen::Index>(vals.size()));
    for (Eigen::Index j = 0; j < values.size(); ++j)
        values[j] = vals.at(static_cast<std::size_t>(j)).get<double>();
    return PsdRankQ(vecs.rows(), std::move(vecs), std::move(values));
}

inline Generator parse_kernel(const nlohmann::json& spec, int dims, const std::string& where) {
    if (!spec.contains("kind")) throw ConfigError(where + ": missing kernel kind");
    const std::string kind = spec.at("kind").get<std::string>();
    auto num = [&spec](const char* key, double fallback) {
        return spec.contains(key) ? spec.at(key).get<double>() : fallback;
    };
    if (kind == "gaussian") {
        reject_unknown_keys(spec, {"kind"}, where);
        return Generator::gaussian(dims);
    }
    if (kind == "kotz") {
        reject_unknown_keys(spec, {"kind", "N", "r", "s"}, where);
        return Generator::kotz(dims, {num("N", 1.0), num("r", 0.5), num("s", 1.0)});
    }
    if (kind == "pearson7") {
        reject_unknown_keys(spec, {"kind", "nu", "theta"}, where);
        return Generator::pearson_vii(dims, {num("nu", 0.5 * dims + 1.0), num("theta", 1.0)});
    }
    if (kind == "pearson2") {
        reject_unknown_keys(spec, {"kind", "gamma"}, where);
        return Generator::pearson_ii(dims, {num("gamma", 1.0)});
    }
    throw ConfigError(where + ": unknown kernel kind '" + kind + "'");
}

}  // namespace io_detail

// Run configuration for the command-line tool. `model` describes the matrix
// law (Xi^2 and beta as matrix specs plus the kernel); `univariate` carries
// the scalar law used by the univariate audit.
struct RunConfig {
    std::optional<GbsParams> model;
    std::optional<UnivariateGbsParams> univariate;

    static RunConfig from_json(const nlohmann::json& j) {
        io_detail::reject_unknown_keys(j, {"model", "univariate"}, "config");
        RunConfig cfg;
        if (j.contains("model")) {
            const auto& mj = j.at("model");
            io_detail::reject_unknown_keys(mj, {"n", "xi2", "beta", "kernel"}, "config.model");
            const int n = mj.at("n").get<int>();
            const PsdRankQ xi2 = io_detail::parse_psd(mj.at("xi2"), "config.model.xi2");
            const PsdRankQ beta = io_detail::parse_psd(mj.at("beta"), "config.model.beta");
            const int dims = n * static_cast<int>(xi2.rank());
            Generator h = io_detail::parse_kernel(mj.at("kernel"), dims, "config.model.kernel");
            cfg.model.emplace(n, xi2.power(0.5), beta, std::move(h));
        }
        if (j.contains("univariate")) {
            const auto& uj = j.at("univariate");
            io_detail::reject_unknown_keys(uj, {"alpha", "beta", "kernel"}, "config.univariate");
            Generator h = uj.contains("kernel")
                              ? io_detail::parse_kernel(uj.at("kernel"), 1, "config.univariate.kernel")
                              : Generator::gaussian(1);
            cfg.univariate.emplace(uj.at("alpha").get<double>(), uj.at("beta").get<double>(),
                                   std::move(h));
        }
        return cfg;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        return from_json(j);
    }
};

}  // namespace smvbs

#endif  // SMVBS_IO_HPP
