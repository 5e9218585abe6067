#include "scifactor/reports.hpp"

#include <ostream>

#include "scifactor/text.hpp"

namespace scifactor {

namespace {

std::string num(double v) { return format_real(v, 10); }

void metric_cells(std::ostream& out, const MetricsReport& m) {
  out << ',' << num(m.mae) << ',' << num(m.mape) << ',' << num(m.mse) << ',' << num(m.acc) << ','
      << num(m.r2);
}

}  // namespace

void write_correlations_csv(std::ostream& out, const std::vector<CorrelationRow>& rows) {
  out << "feature,group,pearson\n";
  for (const auto& r : rows) {
    out << csv_escape(r.feature) << ',' << group_name(r.group) << ',';
    if (r.r) out << num(*r.r);
    out << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "learner,delta_t,n,mae,mape,mse,acc,r2,acc_tolerance,excluded_zero_targets\n";
  for (const auto& r : rows) {
    out << r.learner << ',' << r.delta_t << ',' << r.metrics.n;
    metric_cells(out, r.metrics);
    out << ',' << num(r.metrics.acc_tolerance) << ',' << r.metrics.excluded_zero_targets << '\n';
  }
}

void write_cv_csv(std::ostream& out, const std::vector<CvTable>& tables) {
  out << "learner,delta_t,cell,params,status,mean_mse,mae,mape,mse,acc,r2,selected\n";
  for (const auto& t : tables) {
    for (std::size_t c = 0; c < t.result.cells.size(); ++c) {
      const auto& cell = t.result.cells[c];
      std::string params;
      for (const auto& [k, v] : cell.point) {
        if (!params.empty()) params += ';';
        params += k + "=" + num(v);
      }
      out << t.learner << ',' << t.delta_t << ',' << c << ',' << csv_escape(params) << ',';
      if (cell.failed) {
        out << "failed,,,,,,," << '0' << '\n';
        continue;
      }
      out << "ok," << num(cell.mean_mse);
      metric_cells(out, cell.pooled);
      out << ',' << (c == t.result.best_index ? 1 : 0) << '\n';
    }
  }
}

void write_jackknife_csv(std::ostream& out, const JackknifeReport& report) {
  out << "phase,group,n_columns,n,mae,mape,mse,acc,r2,acc_tolerance\n";
  std::size_t all_columns = 0;
  if (!report.rows.empty()) {
    all_columns = report.rows[0].columns.size() + report.rows[1].columns.size();
  }
  const auto row = [&](std::string_view phase, std::string_view group, std::size_t cols,
                       const MetricsReport& m) {
    out << phase << ',' << group << ',' << cols << ',' << m.n;
    metric_cells(out, m);
    out << ',' << num(m.acc_tolerance) << '\n';
  };
  row("baseline", "all", all_columns, report.baseline);
  for (const auto& r : report.rows) {
    row(phase_name(r.phase), group_name(r.group), r.columns.size(), r.metrics);
  }
}

void write_importance_csv(std::ostream& out, const Importance& importance) {
  const std::string_view measure = importance.measure == ImportanceMeasure::SplitCount
                                       ? "split_count"
                                       : "abs_standardized_weight";
  out << "level,name,group,measure,value\n";
  for (const auto& [name, value] : importance.per_feature) {
    const auto g = feature_group(name);
    out << "feature," << csv_escape(name) << ',' << (g ? group_name(*g) : std::string_view{})
        << ',' << measure << ',' << num(value) << '\n';
  }
  for (const auto& [group, share] : importance.group_shares) {
    out << "group," << group_name(group) << ',' << group_name(group) << ",percent_of_"
        << measure << ',' << num(share) << '\n';
  }
}

void write_gini_csv(std::ostream& out, const GiniReport& report) {
  out << "cohort,institutions,papers,citations,h_index\n";
  for (const auto& c : report.cohorts) {
    out << c.name << ',' << c.institutions.size();
    for (const double v : c.mean_gini) out << ',' << num(v);
    out << '\n';
  }
}

}  // namespace scifactor
