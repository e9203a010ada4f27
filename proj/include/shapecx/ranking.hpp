#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapecx/measures.hpp"

namespace shapecx {

/// Shapes ordered by ascending complexity with tie-aware average ranks.
/// ranks[i] belongs to order[i]; the rank values always sum to n(n+1)/2.
struct Ranking {
    std::vector<std::string> order;
    std::vector<double> ranks;

    size_t size() const { return order.size(); }
};

/// Ascending sort with average ranks for equal scores; equal scores keep a
/// stable display order by id.
Ranking rank(std::vector<std::pair<std::string, double>> scores);

/// Spearman correlation: Pearson on the tie-adjusted rank vectors. The two
/// rankings must cover the same ids and have n >= 2. A ranking where every
/// rank ties is treated as correlating 1 with another all-tie ranking and 0
/// with anything else.
double spearman(const Ranking& a, const Ranking& b);

/// A human (or otherwise external) reference order, least complex first.
struct ReferenceRanking {
    std::vector<std::string> ids;
};

ReferenceRanking load_reference(const std::filesystem::path& path);

struct MeasureColumn {
    std::string name;
    std::vector<double> values;  // aligned with the corpus id list
};

/// Mean pairwise Spearman over `trials` random k-subsets of the corpus.
/// Per-trial sub-seeds derive from the master seed as seed + trial index,
/// so the run is reproducible and trials are independent.
struct SubsetResult {
    std::vector<std::string> measures;
    std::vector<std::vector<double>> mean_rho;  // [i][j], symmetric, 1 on diagonal
};

SubsetResult subset_experiment(const std::vector<std::string>& ids,
                               const std::vector<MeasureColumn>& measures, int k, int trials,
                               uint64_t seed);

/// Per-measure correlation against a reference order, with the rank pairs
/// and an OLS trendline for plotting.
struct ReferenceComparison {
    std::string measure;
    double rho = 0.0;
    std::vector<std::pair<double, double>> pairs;  // (reference rank, measure rank)
    double slope = 0.0;
    double intercept = 0.0;
};

std::vector<ReferenceComparison> compare_to_reference(const std::vector<std::string>& ids,
                                                      const std::vector<MeasureColumn>& measures,
                                                      const ReferenceRanking& ref);

} // namespace shapecx
