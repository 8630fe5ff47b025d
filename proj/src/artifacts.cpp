#include "mlgcp/artifacts.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mlgcp {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto nr = j.size();
  const auto nc = nr ? j.at(0).size() : 0;
  Eigen::MatrixXd m(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t c = 0; c < nc; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_fit_json(const std::string& path, const FitResult& fit,
                    const FirstOrder& first_order) {
  json j;
  j["theta"]["alpha"] = matrix_to_json(fit.theta_hat.alpha);
  j["theta"]["xi"] = vector_to_json(fit.theta_hat.xi);
  j["theta"]["sigma2"] = vector_to_json(fit.theta_hat.sigma2);
  j["theta"]["phi"] = vector_to_json(fit.theta_hat.phi);
  j["beta"] = matrix_to_json(first_order.beta);
  j["objective"] = fit.objective;
  j["lambda"] = fit.lambda;
  j["trace"] = fit.trace;
  j["converged"] = fit.converged;
  j["line_search_stalled"] = fit.line_search_stalled;
  j["inner_cap_exceeded"] = fit.inner_cap_exceeded;
  j["frozen_types"] = fit.frozen_types;
  json mask = json::array();
  for (Eigen::Index i = 0; i < fit.zero_mask.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < fit.zero_mask.cols(); ++k)
      row.push_back(static_cast<bool>(fit.zero_mask(i, k)));
    mask.push_back(row);
  }
  j["zero_mask"] = mask;
  open_out(path) << j.dump(2) << "\n";
}

std::pair<FitResult, FirstOrder> read_fit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  in >> j;
  FitResult fit;
  fit.theta_hat.alpha = matrix_from_json(j.at("theta").at("alpha"));
  fit.theta_hat.xi = vector_from_json(j.at("theta").at("xi"));
  fit.theta_hat.sigma2 = vector_from_json(j.at("theta").at("sigma2"));
  fit.theta_hat.phi = vector_from_json(j.at("theta").at("phi"));
  fit.objective = j.at("objective").get<double>();
  fit.lambda = j.at("lambda").get<double>();
  fit.trace = j.at("trace").get<std::vector<double>>();
  fit.converged = j.at("converged").get<bool>();
  fit.line_search_stalled = j.at("line_search_stalled").get<bool>();
  fit.inner_cap_exceeded = j.at("inner_cap_exceeded").get<bool>();
  fit.frozen_types = j.at("frozen_types").get<std::vector<int>>();
  const json& mask = j.at("zero_mask");
  fit.zero_mask.resize(mask.size(), mask.empty() ? 0 : mask.at(0).size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    for (std::size_t k = 0; k < mask.at(i).size(); ++k)
      fit.zero_mask(i, k) = mask.at(i).at(k).get<bool>();
  FirstOrder fo;
  fo.beta = matrix_from_json(j.at("beta"));
  return {fit, fo};
}

void write_curves_csv(const std::string& path, const std::vector<PcfCurvePoint>& curves) {
  auto out = open_out(path);
  out << "i,j,r,g\n";
  for (const PcfCurvePoint& c : curves)
    out << c.i + 1 << "," << c.j + 1 << "," << c.r << "," << c.g << "\n";
}

void write_cv_json(const std::string& path, const CVResult& cv) {
  json j;
  j["q_grid"] = cv.q_grid;
  j["lambda_grid"] = cv.lambda_grid;
  j["K"] = cv.K;
  j["L"] = cv.L;
  j["q_min"] = cv.q_min;
  j["q_1se"] = cv.q_1se;
  j["lambda_star"] = cv.lambda_star;
  json cells = json::array();
  for (std::size_t qi = 0; qi < cv.q_grid.size(); ++qi)
    for (std::size_t li = 0; li < cv.lambda_grid.size(); ++li) {
      const CVCell& c = cv.cells[qi][li];
      if (c.raw.empty()) continue;  // not evaluated (two-step search)
      cells.push_back({{"q", cv.q_grid[qi]},
                       {"lambda", cv.lambda_grid[li]},
                       {"mean", c.mean},
                       {"se", c.se},
                       {"raw", c.raw},
                       {"empty_fold", c.empty_fold}});
    }
  j["cells"] = cells;
  open_out(path) << j.dump(2) << "\n";
}

void write_cv_csv(const std::string& path, const CVResult& cv) {
  auto out = open_out(path);
  out << "q,lambda,mean,se\n";
  for (std::size_t qi = 0; qi < cv.q_grid.size(); ++qi)
    for (std::size_t li = 0; li < cv.lambda_grid.size(); ++li) {
      const CVCell& c = cv.cells[qi][li];
      if (c.raw.empty()) continue;
      out << cv.q_grid[qi] << "," << cv.lambda_grid[li] << "," << c.mean << ","
          << c.se << "\n";
    }
}

void write_envelope_json(const std::string& path, const EnvelopeResult& env,
                         const std::vector<std::pair<std::pair<int, int>,
                                                     std::pair<int, int>>>& ratio_pairs) {
  json j;
  j["p_value"] = env.p_value;
  j["data_rank"] = env.data_rank;
  j["k_alpha"] = env.k_alpha;
  j["inside"] = env.inside;
  j["r"] = env.r_grid;
  json bands = json::array();
  for (std::size_t pi = 0; pi < ratio_pairs.size(); ++pi) {
    bands.push_back({{"numerator", {ratio_pairs[pi].first.first + 1,
                                    ratio_pairs[pi].first.second + 1}},
                     {"denominator", {ratio_pairs[pi].second.first + 1,
                                      ratio_pairs[pi].second.second + 1}},
                     {"data", env.data_curve[pi]},
                     {"lo", env.lo[pi]},
                     {"hi", env.hi[pi]}});
  }
  j["bands"] = bands;
  open_out(path) << j.dump(2) << "\n";
}

void write_curve_csv(const std::string& path, const std::vector<double>& r,
                     const std::vector<double>& value, const std::vector<double>* lo,
                     const std::vector<double>* hi) {
  auto out = open_out(path);
  out << "r,value";
  if (lo && hi) out << ",lo,hi";
  out << "\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << r[i] << "," << value[i];
    if (lo && hi) out << "," << (*lo)[i] << "," << (*hi)[i];
    out << "\n";
  }
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mlgcp
