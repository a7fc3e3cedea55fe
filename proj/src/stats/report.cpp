#include "pulse/stats/report.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pulse::stats {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

const ReproductionReport::Improvement& ReproductionReport::improvement(const std::string& dataset,
                                                                       const std::string& metric,
                                                                       const std::string& baseline) const {
  for (const auto& i : improvements)
    if (i.dataset == dataset && i.metric == metric && i.baseline == baseline) return i;
  throw std::out_of_range("report: no improvement " + dataset + "/" + metric + "/" + baseline);
}

const ReproductionReport::Ranking& ReproductionReport::ranking(const std::string& dataset,
                                                               const std::string& metric) const {
  for (const auto& r : rankings)
    if (r.dataset == dataset && r.metric == metric) return r;
  throw std::out_of_range("report: no ranking " + dataset + "/" + metric);
}

const ReproductionReport::Pairwise& ReproductionReport::pair(const std::string& dataset, const std::string& metric,
                                                             const std::string& baseline) const {
  for (const auto& p : pairwise)
    if (p.dataset == dataset && p.metric == metric && p.baseline == baseline) return p;
  throw std::out_of_range("report: no comparison " + dataset + "/" + metric + "/" + baseline);
}

ReproductionReport reproduce(const std::filesystem::path& dir, const std::string& ours) {
  ReproductionReport rep;
  const auto overall = load_overall(dir / "table2_overall.tsv");
  const std::pair<std::string, std::string> per_sport[] = {{"FitRec", "table4_fitrec_per_sport.tsv"},
                                                           {"ParroTao", "table5_parrotao_per_sport.tsv"}};
  for (const auto& [dataset, file] : per_sport) {
    for (const char* metric : {"MSE", "MAE"})
      for (const auto& model : overall.models()) {
        if (model == ours) continue;
        rep.improvements.push_back({dataset, metric, model,
                                    improvement(overall.at(ours, dataset, metric).mean,
                                                overall.at(model, dataset, metric).mean)});
      }
    const auto fx = load_per_sport(dir / file);
    for (const char* metric : {"MSE", "MAE"}) {
      const auto& table = fx.metrics.at(metric);
      rep.rankings.push_back({dataset, metric, table.models, friedman(table)});
      const std::size_t o = table.model(ours);
      std::vector<ReproductionReport::Pairwise> family;
      std::vector<double> raw;
      const auto ours_col = table.column(o);
      for (std::size_t m = 0; m < table.models.size(); ++m) {
        if (m == o) continue;
        const auto base = table.column(m);
        std::vector<double> diff(base.size());
        for (std::size_t b = 0; b < base.size(); ++b) diff[b] = ours_col[b] - base[b];
        ReproductionReport::Pairwise p{dataset, metric, table.models[m], wilcoxon_one_sided(diff), 1.0,
                                       wdl(table, o, m)};
        raw.push_back(p.test.p);
        family.push_back(std::move(p));
      }
      const auto adj = bh_fdr(raw);
      for (std::size_t i = 0; i < family.size(); ++i) {
        family[i].p_adjusted = adj.adjusted[i];
        rep.pairwise.push_back(std::move(family[i]));
      }
    }
  }
  return rep;
}

std::string ReproductionReport::render() const {
  std::ostringstream out;
  out << "# pulse-stats-report " << kReportVersion << "\n";
  out << "# FDR: Benjamini-Hochberg within each (dataset, metric) family; one-sided signed-rank, exact for n <= 25\n";
  out << "\n[improvement]\ndataset\tmetric\tbaseline\timprovement_pct\n";
  for (const auto& i : improvements)
    out << i.dataset << '\t' << i.metric << '\t' << i.baseline << '\t' << fmt("%.2f", i.percent) << '\n';
  out << "\n[friedman]\ndataset\tmetric\tmodel\taverage_rank\n";
  for (const auto& r : rankings)
    for (std::size_t m = 0; m < r.models.size(); ++m)
      out << r.dataset << '\t' << r.metric << '\t' << r.models[m] << '\t' << fmt("%.2f", r.result.average_ranks[m])
          << '\n';
  out << "\n[friedman_test]\ndataset\tmetric\tstatistic\tdf\tp\n";
  for (const auto& r : rankings)
    out << r.dataset << '\t' << r.metric << '\t' << fmt("%.4f", r.result.statistic) << '\t' << r.result.df << '\t'
        << fmt("%.3e", r.result.p) << '\n';
  out << "\n[pairwise]\ndataset\tmetric\tbaseline\tw_plus\tn\tp_raw\tp_adjusted\tw-d-l\n";
  for (const auto& p : pairwise)
    out << p.dataset << '\t' << p.metric << '\t' << p.baseline << '\t' << p.test.w_plus << '\t' << p.test.n << '\t'
        << fmt("%.3e", p.test.p) << '\t' << fmt("%.3e", p.p_adjusted) << '\t' << p.wdl.wins << '-' << p.wdl.draws
        << '-' << p.wdl.losses << '\n';
  return out.str();
}

nlohmann::json ReproductionReport::to_json() const {
  nlohmann::json j = {{"version", kReportVersion}};
  for (const auto& i : improvements)
    j["improvement"].push_back({{"dataset", i.dataset}, {"metric", i.metric}, {"baseline", i.baseline},
                                {"percent", i.percent}});
  for (const auto& r : rankings)
    j["friedman"].push_back({{"dataset", r.dataset},
                             {"metric", r.metric},
                             {"models", r.models},
                             {"average_ranks", r.result.average_ranks},
                             {"statistic", r.result.statistic},
                             {"p", r.result.p}});
  for (const auto& p : pairwise)
    j["pairwise"].push_back({{"dataset", p.dataset},
                             {"metric", p.metric},
                             {"baseline", p.baseline},
                             {"p_raw", p.test.p},
                             {"p_adjusted", p.p_adjusted},
                             {"wdl", {p.wdl.wins, p.wdl.draws, p.wdl.losses}}});
  return j;
}

}  // namespace pulse::stats
