#include <fstream>
#include <stdexcept>

#include "grw/cli.hpp"
#include "grw/way.hpp"

namespace grw::cli {

Json cmat_to_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd cmat_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(name + ": expected a nonempty array of rows");
  auto rows = static_cast<Eigen::Index>(j.size());
  auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument(name + ": ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number())
        throw std::invalid_argument(name +
                                    ": entries must be [re, im] pairs");
      m(r, c) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return m;
}

Json way_model_to_json(const grw::way::WAYModel& model) {
  Json j;
  j["dim_s"] = model.dim_s();
  j["dim_a"] = model.dim_a();
  j["M"] = cmat_to_json(model.M);
  j["Gamma_S"] = cmat_to_json(model.Gamma_S);
  j["Gamma_A"] = cmat_to_json(model.Gamma_A);
  j["U"] = cmat_to_json(model.U);
  Json ready = Json::array();
  for (Eigen::Index i = 0; i < model.ready.size(); ++i)
    ready.push_back(Json::array({model.ready(i).real(), model.ready(i).imag()}));
  j["ready"] = ready;
  return j;
}

grw::way::WAYModel way_model_from_json(const Json& j) {
  grw::way::WAYModel m;
  m.M = cmat_from_json(j.at("M"), "M");
  m.Gamma_S = cmat_from_json(j.at("Gamma_S"), "Gamma_S");
  m.Gamma_A = cmat_from_json(j.at("Gamma_A"), "Gamma_A");
  m.U = cmat_from_json(j.at("U"), "U");
  const Json& ready = j.at("ready");
  m.ready = Eigen::VectorXcd(ready.size());
  for (std::size_t i = 0; i < ready.size(); ++i) {
    const Json& e = ready[i];
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("ready: entries must be [re, im] pairs");
    m.ready(static_cast<Eigen::Index>(i)) = {e[0].get<double>(),
                                             e[1].get<double>()};
  }
  m.validate();
  return m;
}

}  // namespace grw::cli
