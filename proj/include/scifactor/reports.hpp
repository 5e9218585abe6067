#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scifactor/eval.hpp"
#include "scifactor/learners.hpp"

namespace scifactor {

struct MetricsRow {
  std::string learner;
  int delta_t = 0;
  MetricsReport metrics;
};

struct CvTable {
  std::string learner;
  int delta_t = 0;
  GridSearchResult result;
};

// feature,group,pearson (empty cell when undefined)
void write_correlations_csv(std::ostream& out, const std::vector<CorrelationRow>& rows);
// learner,delta_t,n,mae,mape,mse,acc,r2,acc_tolerance,excluded_zero_targets
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
// learner,delta_t,cell,params,status,mean_mse,mae,mape,mse,acc,r2,selected
void write_cv_csv(std::ostream& out, const std::vector<CvTable>& tables);
// phase,group,n_columns,n,mae,mape,mse,acc,r2,acc_tolerance; first row is the baseline
void write_jackknife_csv(std::ostream& out, const JackknifeReport& report);
// level,name,group,measure,value; feature rows then group-share rows (percent)
void write_importance_csv(std::ostream& out, const Importance& importance);
// cohort,institutions,papers,citations,h_index
void write_gini_csv(std::ostream& out, const GiniReport& report);

}  // namespace scifactor
