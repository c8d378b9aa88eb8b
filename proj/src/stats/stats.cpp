#include "vignette/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace vignette::stats {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void validate(const RankingDataset& d) {
  if (d.k() < 2) throw DatasetError("need at least 2 conditions, got " + std::to_string(d.k()));
  if (d.n() < 2) throw DatasetError("need at least 2 evaluators, got " + std::to_string(d.n()));
  for (std::size_t i = 0; i < d.n(); ++i) {
    const std::string who = i < d.evaluators.size() ? d.evaluators[i] : "row " + std::to_string(i + 1);
    if (d.ranks[i].size() != d.k())
      throw DatasetError(who + ": expected " + std::to_string(d.k()) + " ranks, got " + std::to_string(d.ranks[i].size()));
    std::vector<int> sorted = d.ranks[i];
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (j > 0 && sorted[j] == sorted[j - 1]) throw DatasetError(who + ": tied rank " + std::to_string(sorted[j]) + " (ties are not supported)");
      if (sorted[j] != static_cast<int>(j) + 1) throw DatasetError(who + ": ranks must be a permutation of 1.." + std::to_string(d.k()));
    }
  }
}

RankingDataset parse_rankings_csv(std::string_view text) {
  RankingDataset d;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_csv(t);
    if (!header) {
      if (cells.size() < 3) throw DatasetError("line " + std::to_string(lineno) + ": header needs an id column and at least 2 conditions");
      d.conditions.assign(cells.begin() + 1, cells.end());
      for (const auto& c : d.conditions)
        if (c.empty()) throw DatasetError("line " + std::to_string(lineno) + ": empty condition name");
      header = true;
      continue;
    }
    if (cells.size() != d.conditions.size() + 1)
      throw DatasetError("line " + std::to_string(lineno) + ": expected " + std::to_string(d.conditions.size() + 1) + " cells, got " +
                         std::to_string(cells.size()));
    std::vector<int> row;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(cells[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[j].size())
        throw DatasetError("line " + std::to_string(lineno) + ": rank '" + cells[j] + "' is not an integer");
      row.push_back(v);
    }
    d.evaluators.push_back(cells[0].empty() ? "row " + std::to_string(d.evaluators.size() + 1) : cells[0]);
    d.ranks.push_back(std::move(row));
  }
  if (!header) throw DatasetError("missing header row");
  validate(d);
  return d;
}

RankingDataset load_rankings(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_rankings_csv(ss.str());
  } catch (const DatasetError& e) {
    throw DatasetError(file.string() + ": " + e.what());
  }
}

std::string to_csv(const RankingDataset& d) {
  std::string out = "evaluator";
  for (const auto& c : d.conditions) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < d.n(); ++i) {
    out += i < d.evaluators.size() ? d.evaluators[i] : std::to_string(i + 1);
    for (int r : d.ranks[i]) out += "," + std::to_string(r);
    out += "\n";
  }
  return out;
}

std::vector<double> mean_rankings(const RankingDataset& d) {
  validate(d);
  std::vector<double> means(d.k(), 0.0);
  for (const auto& row : d.ranks)
    for (std::size_t j = 0; j < d.k(); ++j) means[j] += row[j];
  for (auto& m : means) m /= static_cast<double>(d.n());
  return means;
}

FriedmanResult friedman_test(const RankingDataset& d) {
  validate(d);
  FriedmanResult r;
  r.n = d.n();
  r.k = d.k();
  r.rank_sums.assign(r.k, 0.0);
  for (const auto& row : d.ranks)
    for (std::size_t j = 0; j < r.k; ++j) r.rank_sums[j] += row[j];
  // integer arithmetic keeps perfect-agreement datasets exact
  long long sum_sq = 0;
  for (double s : r.rank_sums) sum_sq += static_cast<long long>(s) * static_cast<long long>(s);
  const long long n = static_cast<long long>(r.n), k = static_cast<long long>(r.k);
  const long long num = 12 * sum_sq - 3 * n * n * k * (k + 1) * (k + 1);
  r.chi_square = static_cast<double>(num) / static_cast<double>(n * k * (k + 1));
  r.df = static_cast<double>(k - 1);
  boost::math::chi_squared dist(r.df);
  r.p_value = r.chi_square <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.chi_square));
  return r;
}

double studentized_range_cdf(double q, int k) {
  if (k < 2) throw std::invalid_argument("studentized range needs k >= 2");
  if (q <= 0) return 0.0;
  const boost::math::normal norm;
  auto f = [&](double z) {
    const double inner = boost::math::cdf(norm, z) - boost::math::cdf(norm, z - q);
    return boost::math::pdf(norm, z) * std::pow(inner, k - 1);
  };
  const double lo = -9.0, hi = 9.0 + q;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  return std::clamp(k * v, 0.0, 1.0);
}

double studentized_range_quantile(double alpha, int k) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  auto g = [&](double q) { return (1.0 - studentized_range_cdf(q, k)) - alpha; };
  boost::math::tools::eps_tolerance<double> tol(45);
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(g, 1e-6, 20.0, tol, iters);
  return 0.5 * (a + b);
}

double nemenyi_critical_difference(int k, std::size_t n, double alpha) {
  const double q = studentized_range_quantile(alpha, k) / std::sqrt(2.0);
  return q * std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(n)));
}

std::vector<std::vector<double>> nemenyi_posthoc(const RankingDataset& d) {
  const auto means = mean_rankings(d);
  const std::size_t k = d.k();
  const double se = std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(d.n())));
  std::vector<std::vector<double>> p(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double q = std::abs(means[i] - means[j]) / se * std::sqrt(2.0);
      p[i][j] = p[j][i] = std::clamp(1.0 - studentized_range_cdf(q, static_cast<int>(k)), 0.0, 1.0);
    }
  return p;
}

std::string format_p(double p, double cutoff) {
  if (p < cutoff) return "< " + two_decimals(cutoff);
  return two_decimals(p);
}

std::string format_pairwise_table(const RankingDataset& d, const std::vector<std::vector<double>>& p, double alpha) {
  const auto means = mean_rankings(d);
  std::string out = "|";
  out += " |";
  for (std::size_t j = 0; j < d.k(); ++j) out += " " + d.conditions[j] + " (μ=" + two_decimals(means[j]) + ") |";
  out += "\n|---|";
  for (std::size_t j = 0; j < d.k(); ++j) out += "---|";
  out += "\n";
  for (std::size_t i = 0; i < d.k(); ++i) {
    out += "| " + d.conditions[i] + " |";
    for (std::size_t j = 0; j < d.k(); ++j) {
      if (j <= i) {
        out += " - |";
        continue;
      }
      const std::string cell = format_p(p[i][j], alpha);
      out += " " + (p[i][j] < alpha ? "**" + cell + "**" : cell) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string format_means(const RankingDataset& d) {
  const auto means = mean_rankings(d);
  std::string out;
  for (std::size_t j = 0; j < d.k(); ++j) {
    if (j) out += ", ";
    out += two_decimals(means[j]) + " for " + d.conditions[j];
  }
  return out;
}

}  // namespace vignette::stats
