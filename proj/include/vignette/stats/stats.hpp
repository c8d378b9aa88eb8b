#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vignette::stats {

class DatasetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rows are evaluators, columns are conditions. Each row is a permutation of 1..k.
struct RankingDataset {
  std::vector<std::string> conditions;
  std::vector<std::string> evaluators;
  std::vector<std::vector<int>> ranks;

  std::size_t n() const { return ranks.size(); }
  std::size_t k() const { return conditions.size(); }
};

/// Checks shape, N >= 2, k >= 2 and that every row is a permutation. Throws DatasetError.
void validate(const RankingDataset& d);

/// CSV with a header row `<id column>,<condition>,...`; blank lines and lines starting with '#' are skipped.
RankingDataset parse_rankings_csv(std::string_view text);
RankingDataset load_rankings(const std::filesystem::path& file);
std::string to_csv(const RankingDataset& d);

std::vector<double> mean_rankings(const RankingDataset& d);

struct FriedmanResult {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> rank_sums;
  double chi_square = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

FriedmanResult friedman_test(const RankingDataset& d);

/// Studentized range distribution with infinite degrees of freedom.
double studentized_range_cdf(double q, int k);
/// Upper-tail quantile: P(Q > q) = alpha.
double studentized_range_quantile(double alpha, int k);

/// Critical mean-rank difference for the Nemenyi test.
double nemenyi_critical_difference(int k, std::size_t n, double alpha);

/// k x k matrix of pairwise p-values; symmetric with a unit diagonal.
std::vector<std::vector<double>> nemenyi_posthoc(const RankingDataset& d);

/// "< 0.01" below the cut-off, otherwise two decimals.
std::string format_p(double p, double cutoff = 0.01);

/// Pairwise table with one row per condition, upper triangle filled; header cells carry the mean rank, significant cells are wrapped in ** **.
std::string format_pairwise_table(const RankingDataset& d, const std::vector<std::vector<double>>& p, double alpha = 0.01);

/// "2.37 for CD, 2.58 for HA, ..." in column order.
std::string format_means(const RankingDataset& d);

}  // namespace vignette::stats
