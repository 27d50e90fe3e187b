#include "nbi/experiments/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "nbi/common/error.hpp"

namespace nbi::experiments {

CellSummary summarize(std::vector<double> fold_accuracies) {
  CellSummary s;
  s.fold_accuracies = std::move(fold_accuracies);
  const auto n = static_cast<double>(s.fold_accuracies.size());
  if (s.fold_accuracies.empty()) return s;
  for (double a : s.fold_accuracies) s.mean += a;
  s.mean /= n;
  if (s.fold_accuracies.size() > 1) {
    double ss = 0;
    for (double a : s.fold_accuracies) ss += (a - s.mean) * (a - s.mean);
    s.std = std::sqrt(ss / (n - 1));
  }
  return s;
}

namespace {

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  // TagSet strings contain a multi-byte union sign; pad on code points.
  std::size_t cps = 0;
  for (unsigned char ch : s)
    if ((ch & 0xC0) != 0x80) ++cps;
  return s + std::string(width > cps ? width - cps : 0, ' ');
}

std::set<std::string> source_ids(const std::vector<classification::PredictionRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.source_id);
  return ids;
}

}  // namespace

std::string format_cell(const CellSummary& cell) { return percent(cell.mean) + "(" + percent(cell.std) + ")"; }

Report aggregate(const ExperimentPlan& plan, const FoldResults& results, int folds, double alpha) {
  if (folds < 1) throw ValidationError("report needs at least one fold");
  Report report;
  report.experiment = plan.id;
  report.folds = folds;
  for (const auto& spec : plan.architectures) report.architectures.push_back(spec.architecture);

  for (const auto& c : results.cells) {
    if (c.key.experiment != plan.id) continue;
    if (report.config_hash.empty()) report.config_hash = c.config_hash;
    if (c.config_hash != report.config_hash)
      throw ValidationError("cell " + c.key.name() + " was produced by config " + c.config_hash + ", others by " +
                            report.config_hash);
  }

  // Pooled records per (row, architecture), only for complete cells.
  std::map<std::pair<int, std::size_t>, std::vector<classification::PredictionRecord>> pooled;

  for (std::size_t r = 0; r < plan.rows.size(); ++r) {
    RowReport row;
    row.train = plan.rows[r].train;
    row.test = plan.rows[r].test;
    double sum = 0;
    bool full = true;
    for (std::size_t a = 0; a < report.architectures.size(); ++a) {
      std::vector<double> accs;
      std::vector<classification::PredictionRecord> records;
      bool missing = false;
      for (int f = 0; f < folds; ++f) {
        const CellKey key{plan.id, static_cast<int>(r), report.architectures[a], f};
        const auto* cell = results.find(key);
        if (!cell) {
          report.gaps.push_back(key.name());
          missing = true;
          continue;
        }
        accs.push_back(cell->accuracy);
        records.insert(records.end(), cell->records.begin(), cell->records.end());
      }
      if (missing) {
        row.cells.emplace_back();
        full = false;
      } else {
        row.cells.push_back(summarize(accs));
        sum += row.cells.back()->mean;
        pooled[{static_cast<int>(r), a}] = std::move(records);
      }
      row.improved.push_back(false);
    }
    if (full && !report.architectures.empty()) row.average = sum / static_cast<double>(report.architectures.size());
    report.rows.push_back(std::move(row));
  }

  for (std::size_t a = 0; a < report.architectures.size(); ++a) {
    for (int i = 0; i < static_cast<int>(plan.rows.size()); ++i) {
      for (int j = i + 1; j < static_cast<int>(plan.rows.size()); ++j) {
        auto pa = pooled.find({i, a});
        auto pb = pooled.find({j, a});
        if (pa == pooled.end() || pb == pooled.end()) continue;
        // Rows that test different images (E1) cannot be paired.
        if (source_ids(pa->second) != source_ids(pb->second)) continue;
        PairwiseTest t;
        t.architecture = report.architectures[a];
        t.row_a = i;
        t.row_b = j;
        t.result = mcnemar(pa->second, pb->second, alpha);
        t.accuracy_a = classification::accuracy_of(pa->second);
        t.accuracy_b = classification::accuracy_of(pb->second);
        if (i == 0 && t.result.significant && t.accuracy_b > t.accuracy_a) report.rows[j].improved[a] = true;
        report.tests.push_back(t);
      }
    }
  }
  return report;
}

std::string render_text(const Report& report) {
  std::ostringstream out;
  constexpr std::size_t kTag = 14, kCell = 13;
  out << title(report.experiment) << "\n";
  out << pad_right("Training", kTag) << pad_right("Test", kTag);
  for (auto a : report.architectures) out << pad_right(std::string(classification::to_string(a)), kCell);
  out << "avg\n";
  for (const auto& row : report.rows) {
    out << pad_right(data::to_string(row.train), kTag) << pad_right(data::to_string(row.test), kTag);
    for (std::size_t a = 0; a < row.cells.size(); ++a) {
      std::string cell = row.cells[a] ? format_cell(*row.cells[a]) : "--";
      if (row.improved[a]) cell += "*";
      out << pad_right(cell, kCell);
    }
    out << (row.average ? percent(*row.average) : "--") << "\n";
  }
  if (!report.complete()) out << "missing cells: " << report.gaps.size() << "\n";
  out << "config " << report.config_hash << ", " << report.folds << " folds, * = McNemar p < 0.05 vs first row\n";
  return out.str();
}

std::string render_csv(const Report& report) {
  std::ostringstream out;
  out << "experiment,row,train,test,architecture,cell,mean,std";
  for (int f = 0; f < report.folds; ++f) out << ",fold" << f;
  out << ",improved,config_hash\n";
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    for (std::size_t a = 0; a < row.cells.size(); ++a) {
      out << to_string(report.experiment) << ',' << r << ",\"" << data::to_string(row.train) << "\",\""
          << data::to_string(row.test) << "\"," << classification::to_string(report.architectures[a]) << ',';
      if (row.cells[a]) {
        const auto& c = *row.cells[a];
        out << format_cell(c) << ',' << c.mean << ',' << c.std;
        for (double acc : c.fold_accuracies) out << ',' << acc;
      } else {
        out << "missing,,";
        for (int f = 0; f < report.folds; ++f) out << ',';
      }
      out << ',' << (row.improved[a] ? 1 : 0) << ',' << report.config_hash << '\n';
    }
  }
  return out.str();
}

nlohmann::json render_json(const Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t a = 0; a < row.cells.size(); ++a) {
      const std::string arch(classification::to_string(report.architectures[a]));
      if (!row.cells[a]) {
        cells[arch] = nullptr;
        continue;
      }
      const auto& c = *row.cells[a];
      cells[arch] = {{"mean", c.mean},
                     {"std", c.std},
                     {"folds", c.fold_accuracies},
                     {"text", format_cell(c)},
                     {"improved", static_cast<bool>(row.improved[a])}};
    }
    rows.push_back({{"train", data::to_string(row.train)},
                    {"test", data::to_string(row.test)},
                    {"cells", cells},
                    {"average", row.average ? nlohmann::json(*row.average) : nlohmann::json(nullptr)}});
  }
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : report.tests)
    tests.push_back({{"architecture", classification::to_string(t.architecture)},
                     {"rows", {t.row_a, t.row_b}},
                     {"b", t.result.b},
                     {"c", t.result.c},
                     {"p", t.result.p_value},
                     {"exact", t.result.exact},
                     {"significant", t.result.significant},
                     {"accuracy", {t.accuracy_a, t.accuracy_b}}});
  return {{"experiment", to_string(report.experiment)},
          {"config_hash", report.config_hash},
          {"folds", report.folds},
          {"complete", report.complete()},
          {"gaps", report.gaps},
          {"rows", rows},
          {"tests", tests}};
}

data::Image image_grid(const std::vector<std::pair<const data::Image*, const data::Image*>>& pairs, int margin) {
  if (pairs.empty()) throw ValidationError("image grid needs at least one pair");
  int cell_h = 0, cell_w = 0;
  for (const auto& [real, fake] : pairs) {
    if (!real || !fake) throw ValidationError("image grid: null image");
    cell_h = std::max({cell_h, real->height, fake->height});
    cell_w = std::max({cell_w, real->width, fake->width});
  }
  const int rows = static_cast<int>(pairs.size());
  data::Image grid;
  grid.height = rows * cell_h + (rows + 1) * margin;
  grid.width = 2 * cell_w + 3 * margin;
  grid.values.assign(static_cast<std::size_t>(grid.height) * grid.width * 3, 1.0f);
  auto blit = [&](const data::Image& img, int top, int left) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int ch = 0; ch < 3; ++ch) grid.at(top + y, left + x, ch) = img.at(y, x, ch);
  };
  for (int r = 0; r < rows; ++r) {
    const int top = margin + r * (cell_h + margin);
    blit(*pairs[r].first, top, margin);
    blit(*pairs[r].second, top, 2 * margin + cell_w);
  }
  return grid;
}

}  // namespace nbi::experiments
