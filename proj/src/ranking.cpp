#include "shapecx/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "shapecx/error.hpp"
#include "shapecx/rng.hpp"

namespace shapecx {

Ranking rank(std::vector<std::pair<std::string, double>> scores) {
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    Ranking r;
    r.order.reserve(scores.size());
    r.ranks.resize(scores.size());
    for (const auto& [id, v] : scores) {
        (void)v;
        r.order.push_back(id);
    }
    size_t i = 0;
    while (i < scores.size()) {
        size_t j = i;
        while (j < scores.size() && scores[j].second == scores[i].second) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k) r.ranks[k] = avg;
        i = j;
    }
    return r;
}

double spearman(const Ranking& a, const Ranking& b) {
    if (a.size() != b.size())
        throw DataError("spearman: rankings cover different numbers of shapes");
    const size_t n = a.size();
    if (n < 2) throw DataError("spearman: needs at least two shapes");

    std::map<std::string, double> rb;
    for (size_t i = 0; i < n; ++i) rb[b.order[i]] = b.ranks[i];
    if (rb.size() != n) throw DataError("spearman: duplicate ids in ranking");

    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const auto it = rb.find(a.order[i]);
        if (it == rb.end())
            throw DataError("spearman: id '" + a.order[i] + "' missing from the other ranking");
        const double x = a.ranks[i], y = it->second;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double nd = static_cast<double>(n);
    const double vx = nd * sxx - sx * sx;
    const double vy = nd * syy - sy * sy;
    if (vx <= 0 && vy <= 0) return 1.0;  // both rankings fully tied
    if (vx <= 0 || vy <= 0) return 0.0;
    return (nd * sxy - sx * sy) / std::sqrt(vx * vy);
}

ReferenceRanking load_reference(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open reference ranking " + path.string());
    ReferenceRanking ref;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) ref.ids.push_back(line);
    }
    return ref;
}

SubsetResult subset_experiment(const std::vector<std::string>& ids,
                               const std::vector<MeasureColumn>& measures, int k, int trials,
                               uint64_t seed) {
    const int n = static_cast<int>(ids.size());
    if (k < 2) throw DataError("subset_experiment: k must be >= 2");
    if (n < k)
        throw DataError("subset_experiment: corpus of " + std::to_string(n) +
                        " is smaller than k=" + std::to_string(k));
    for (const auto& m : measures)
        if (m.values.size() != ids.size())
            throw DataError("subset_experiment: measure '" + m.name + "' not aligned with corpus");

    const size_t nm = measures.size();
    SubsetResult res;
    for (const auto& m : measures) res.measures.push_back(m.name);
    res.mean_rho.assign(nm, std::vector<double>(nm, 0.0));

    std::vector<int> pool(ids.size());
    std::vector<Ranking> per_measure(nm);
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed + static_cast<uint64_t>(t));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        // partial Fisher-Yates: the first k entries become the sample
        for (int i = 0; i < k; ++i)
            std::swap(pool[static_cast<size_t>(i)],
                      pool[static_cast<size_t>(i + rng.uniform_int(n - i))]);

        for (size_t m = 0; m < nm; ++m) {
            std::vector<std::pair<std::string, double>> s;
            s.reserve(static_cast<size_t>(k));
            for (int i = 0; i < k; ++i)
                s.emplace_back(ids[static_cast<size_t>(pool[static_cast<size_t>(i)])],
                               measures[m].values[static_cast<size_t>(pool[static_cast<size_t>(i)])]);
            per_measure[m] = rank(std::move(s));
        }
        for (size_t i = 0; i < nm; ++i)
            for (size_t j = i + 1; j < nm; ++j) {
                const double rho = spearman(per_measure[i], per_measure[j]);
                res.mean_rho[i][j] += rho;
                res.mean_rho[j][i] += rho;
            }
    }
    for (size_t i = 0; i < nm; ++i)
        for (size_t j = 0; j < nm; ++j)
            res.mean_rho[i][j] = i == j ? 1.0 : res.mean_rho[i][j] / trials;
    return res;
}

std::vector<ReferenceComparison> compare_to_reference(const std::vector<std::string>& ids,
                                                      const std::vector<MeasureColumn>& measures,
                                                      const ReferenceRanking& ref) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
    if (index.size() != ids.size()) throw DataError("duplicate ids in scored corpus");
    for (const auto& id : ref.ids)
        if (!index.count(id))
            throw DataError("reference id '" + id + "' is not in the scored corpus");
    if (ref.ids.size() != ids.size())
        throw DataError("reference lists " + std::to_string(ref.ids.size()) +
                        " ids but the corpus has " + std::to_string(ids.size()));

    // reference ranks: position in the file, 1-based
    Ranking ref_rank;
    ref_rank.order = ref.ids;
    ref_rank.ranks.resize(ref.ids.size());
    for (size_t i = 0; i < ref.ids.size(); ++i) ref_rank.ranks[i] = static_cast<double>(i + 1);

    std::vector<ReferenceComparison> out;
    for (const auto& m : measures) {
        std::vector<std::pair<std::string, double>> s;
        for (size_t i = 0; i < ids.size(); ++i) s.emplace_back(ids[i], m.values[i]);
        const Ranking mr = rank(std::move(s));
        std::map<std::string, double> mrank;
        for (size_t i = 0; i < mr.size(); ++i) mrank[mr.order[i]] = mr.ranks[i];

        ReferenceComparison rc;
        rc.measure = m.name;
        rc.rho = spearman(ref_rank, mr);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(ids.size());
        for (size_t i = 0; i < ref.ids.size(); ++i) {
            const double x = static_cast<double>(i + 1);
            const double y = mrank[ref.ids[i]];
            rc.pairs.emplace_back(x, y);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double denom = n * sxx - sx * sx;
        rc.slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
        rc.intercept = (sy - rc.slope * sx) / n;
        out.push_back(std::move(rc));
    }
    return out;
}

} // namespace shapecx
