#pragma once

// trec_eval-style ranking metrics, paired significance testing, and the
// ambiguity census over raw queries.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zeqr/datamodel.hpp"
#include "zeqr/ingest.hpp"
#include "zeqr/reformulator.hpp"
#include "zeqr/retrieval.hpp"

namespace zeqr {

struct QueryMetrics {
  double ndcg_at_5 = 0.0;
  double p_at_5 = 0.0;
  double r_at_100 = 0.0;
  double ap = 0.0;

  bool operator==(const QueryMetrics&) const = default;
};

struct MetricReport {
  std::map<std::string, QueryMetrics> per_query;
  QueryMetrics means;  // NaN fields when num_queries == 0
  std::size_t num_queries = 0;
  std::size_t skipped_unjudged = 0;     // run queries missing from qrels
  std::size_t skipped_no_relevant = 0;  // judged, but nothing at the cutoff
};

// NDCG@5 uses raw grades as gain with a 1/log2(rank + 1) discount and the
// ideal ordering of all judged grades. P@5, R@100 and AP treat grade >=
// config.map_relevance_cutoff as relevant. Unjudged documents are
// non-relevant; queries absent from qrels or without relevant documents
// are left out of per_query and of the means.
MetricReport evaluate_run(const std::vector<RunResult>& run, const Qrels& qrels, const Config& config);

// `query_id ndcg@5 p@5 r@100 ap` rows plus an `all` row; n/a for empty means.
void write_report_tsv(const MetricReport& report, std::ostream& out);

struct TTestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t degrees_of_freedom = 0;
  bool degenerate = false;  // all differences equal and nonzero
};

// Two-sided paired t-test on a[i] - b[i]. PreconditionError on length
// mismatch or fewer than two pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct CensusFlags {
  bool has_coref = false;
  bool has_omission = false;

  bool operator==(const CensusFlags&) const = default;
};

struct AmbiguityCensus {
  std::size_t coreference_count = 0;
  std::size_t omission_count = 0;
  std::map<std::pair<std::string, int>, CensusFlags> per_turn;
};

// Runs both detectors on every raw query.
AmbiguityCensus ambiguity_census(const std::vector<Session>& sessions, const IdfTable& idf,
                                 const Config& config, const Analyzer& analyzer = {});

// Per-turn rows `session turn coref omission`, then `Coreference N` and
// `Omission N` totals.
void write_census_tsv(const AmbiguityCensus& census, std::ostream& out);

}  // namespace zeqr
