#include "cstar/json_io.hpp"

#include <nlohmann/json.hpp>

namespace cstar {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            data.push_back({m(i, j).real(), m(i, j).imag()});
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw DimensionError("matrix: expected object with rows, cols, data");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0)
        throw DimensionError("matrix: negative dimensions");
    const auto& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw DimensionError("matrix: data length must equal rows*cols");
    CMatrix m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2, ++k) {
            const auto& entry = data.at(static_cast<size_t>(k));
            if (!entry.is_array() || entry.size() != 2)
                throw DimensionError("matrix: each entry must be a [re, im] pair");
            m(i, j2) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    return m;
}

}  // namespace cstar
