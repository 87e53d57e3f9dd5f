#include "zeqr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "zeqr/error.hpp"

namespace zeqr {

namespace {

constexpr std::size_t kNdcgDepth = 5;
constexpr std::size_t kPrecisionDepth = 5;
constexpr std::size_t kRecallDepth = 100;

QueryMetrics score_query(const RunResult& run, const std::map<std::string, int>& judged,
                         int cutoff, std::size_t total_relevant) {
  QueryMetrics m;
  // First occurrence wins if a run repeats a document.
  std::vector<int> grades;
  std::set<std::string_view> seen;
  for (const auto& hit : run.ranked) {
    if (!seen.insert(hit.doc_id).second) continue;
    auto it = judged.find(hit.doc_id);
    grades.push_back(it == judged.end() ? 0 : it->second);
  }

  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(kNdcgDepth, grades.size()); ++i)
    dcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
  std::vector<int> ideal;
  for (const auto& [doc, g] : judged)
    if (g > 0) ideal.push_back(g);
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(kNdcgDepth, ideal.size()); ++i)
    idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  m.ndcg_at_5 = idcg > 0 ? dcg / idcg : 0.0;

  std::size_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] < cutoff) continue;
    ++hits;
    precision_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    if (i < kPrecisionDepth) m.p_at_5 += 1.0;
    if (i < kRecallDepth) m.r_at_100 += 1.0;
  }
  m.p_at_5 /= static_cast<double>(kPrecisionDepth);
  m.r_at_100 /= static_cast<double>(total_relevant);
  m.ap = precision_sum / static_cast<double>(total_relevant);
  return m;
}

}  // namespace

MetricReport evaluate_run(const std::vector<RunResult>& run, const Qrels& qrels, const Config& config) {
  MetricReport report;
  for (const auto& result : run) {
    if (!qrels.has_query(result.query_id)) {
      ++report.skipped_unjudged;
      continue;
    }
    const auto& judged = qrels.judgments_for(result.query_id);
    std::size_t relevant = 0;
    for (const auto& [doc, g] : judged)
      if (g >= config.map_relevance_cutoff) ++relevant;
    if (relevant == 0) {
      ++report.skipped_no_relevant;
      continue;
    }
    report.per_query[result.query_id] =
        score_query(result, judged, config.map_relevance_cutoff, relevant);
  }
  report.num_queries = report.per_query.size();
  if (report.num_queries == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.means = {nan, nan, nan, nan};
    return report;
  }
  for (const auto& [q, m] : report.per_query) {
    report.means.ndcg_at_5 += m.ndcg_at_5;
    report.means.p_at_5 += m.p_at_5;
    report.means.r_at_100 += m.r_at_100;
    report.means.ap += m.ap;
  }
  const double n = static_cast<double>(report.num_queries);
  report.means.ndcg_at_5 /= n;
  report.means.p_at_5 /= n;
  report.means.r_at_100 /= n;
  report.means.ap /= n;
  return report;
}

void write_report_tsv(const MetricReport& report, std::ostream& out) {
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  out << "query_id\tndcg@5\tp@5\tr@100\tap\n";
  for (const auto& [q, m] : report.per_query)
    out << q << '\t' << num(m.ndcg_at_5) << '\t' << num(m.p_at_5) << '\t' << num(m.r_at_100)
        << '\t' << num(m.ap) << '\n';
  const auto& m = report.means;
  out << "all\t" << num(m.ndcg_at_5) << '\t' << num(m.p_at_5) << '\t' << num(m.r_at_100) << '\t'
      << num(m.ap) << '\n';
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw PreconditionError("paired t-test needs equal lengths, got " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  if (a.size() < 2) throw PreconditionError("paired t-test needs at least two pairs");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TTestResult r;
  r.degrees_of_freedom = n - 1;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double se = sd / std::sqrt(static_cast<double>(n));
  if (se == 0.0) {
    if (mean == 0.0) return r;  // identical samples: t = 0, p = 1
    r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.degenerate = true;
    return r;
  }
  r.t_statistic = mean / se;
  boost::math::students_t dist(static_cast<double>(r.degrees_of_freedom));
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t_statistic))));
  return r;
}

AmbiguityCensus ambiguity_census(const std::vector<Session>& sessions, const IdfTable& idf,
                                 const Config& config, const Analyzer& analyzer) {
  AmbiguityCensus census;
  const auto rules = omission_rules(config);
  for (const auto& s : sessions) {
    for (const auto& t : s.turns) {
      const auto tokens = analyzer.tagger->tag(t.raw_query);
      CensusFlags flags;
      flags.has_coref = !detect_pronouns(tokens, analyzer.inventory).empty();
      flags.has_omission =
          !find_omission_candidates(tokens, idf, config.idf_threshold, rules).empty();
      census.coreference_count += flags.has_coref;
      census.omission_count += flags.has_omission;
      census.per_turn[{s.session_id, t.turn_id}] = flags;
    }
  }
  return census;
}

void write_census_tsv(const AmbiguityCensus& census, std::ostream& out) {
  out << "session\tturn\tcoref\tomission\n";
  for (const auto& [key, flags] : census.per_turn)
    out << key.first << '\t' << key.second << '\t' << flags.has_coref << '\t' << flags.has_omission
        << '\n';
  out << "Coreference\t" << census.coreference_count << '\n';
  out << "Omission\t" << census.omission_count << '\n';
}

}  // namespace zeqr
