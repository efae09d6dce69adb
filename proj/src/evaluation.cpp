// Copyright 2026 The Cadence Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cadence/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cadence/common.hpp"

namespace cadence::evaluation {

namespace {

double RatioOrNan(double num, double den) {
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

ClassMetrics OneClassMetrics(int tp, int fp, int fn) {
  ClassMetrics m;
  m.precision = RatioOrNan(tp, tp + fp);
  m.recall = RatioOrNan(tp, tp + fn);
  if (std::isnan(m.precision) || std::isnan(m.recall) ||
      m.precision + m.recall == 0.0) {
    m.f1 = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

void CheckCsvField(const std::string& field) {
  CADENCE_CHECK_DATA(field.find(',') == std::string::npos &&
                         field.find('\n') == std::string::npos,
                     "identifier contains a csv delimiter: " + field);
}

nlohmann::json JsonNum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    ThrowData("could not write file: " + path.string(),
              ErrorCode::kIoFailure);
  }
  return out;
}

// Rows grouped per subject with validated fold consistency; skips rows that
// are themselves fusions so fusing is stable under repetition.
struct SubjectRows {
  std::string subject_id;
  int fold = -1;
  std::vector<const ScoreRow*> rows;
};

std::vector<SubjectRows> GroupBySubject(const ScoreTable& table) {
  std::vector<std::string> systems;
  std::vector<SubjectRows> groups;
  for (const ScoreRow& row : table.rows) {
    if (row.modality == Modality::kFused) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const SubjectRows& g) {
                             return g.subject_id == row.subject_id;
                           });
    if (it == groups.end()) {
      groups.push_back({row.subject_id, row.fold, {&row}});
      continue;
    }
    for (const ScoreRow* prev : it->rows) {
      if (prev->system_id == row.system_id) {
        ThrowData("duplicate score for subject '" + row.subject_id +
                      "', system '" + row.system_id + "'");
      }
    }
    CADENCE_CHECK_DATA(it->fold == row.fold,
                       "subject '" + row.subject_id +
                           "' appears in multiple folds");
    it->rows.push_back(&row);
  }
  CADENCE_CHECK_DATA(!groups.empty(), "score table has no system rows");

  // Every subject must cover the full system set.
  std::set<std::string> all_systems;
  for (const SubjectRows& g : groups) {
    for (const ScoreRow* row : g.rows) all_systems.insert(row->system_id);
  }
  for (const SubjectRows& g : groups) {
    for (const std::string& sys : all_systems) {
      const bool found =
          std::any_of(g.rows.begin(), g.rows.end(),
                      [&](const ScoreRow* r) { return r->system_id == sys; });
      if (!found) {
        ThrowData("subject '" + g.subject_id + "' is missing a score for '" +
                      sys + "'",
                  ErrorCode::kMissingScore);
      }
    }
  }
  return groups;
}

ScoreRow FusedRow(const SubjectRows& group, const std::string& fused_id,
                  double value) {
  ScoreRow row;
  row.subject_id = group.subject_id;
  row.system_id = fused_id;
  row.modality = Modality::kFused;
  row.raw = value;
  row.znormed = value;
  row.fold = group.fold;
  return row;
}

}  // namespace

std::string ModalityName(Modality m) {
  switch (m) {
    case Modality::kSpeech:
      return "speech";
    case Modality::kText:
      return "text";
    case Modality::kFused:
      return "fused";
  }
  ThrowData("unknown modality");
}

std::vector<std::string> ScoreTable::SystemIds() const {
  std::vector<std::string> ids;
  for (const ScoreRow& row : rows) {
    if (std::find(ids.begin(), ids.end(), row.system_id) == ids.end()) {
      ids.push_back(row.system_id);
    }
  }
  return ids;
}

std::vector<const ScoreRow*> ScoreTable::RowsForSystem(
    const std::string& system_id) const {
  std::vector<const ScoreRow*> out;
  for (const ScoreRow& row : rows) {
    if (row.system_id == system_id) out.push_back(&row);
  }
  std::sort(out.begin(), out.end(),
            [](const ScoreRow* a, const ScoreRow* b) {
              return a->subject_id < b->subject_id;
            });
  return out;
}

ZnormStats FitZnorm(const std::vector<double>& training_scores,
                    const std::string& system_id) {
  CADENCE_CHECK_DATA(training_scores.size() >= 2,
                     "system '" + system_id +
                         "' needs at least two training scores to normalize");
  double mean = 0.0;
  for (const double s : training_scores) {
    CADENCE_CHECK_DATA(std::isfinite(s), "system '" + system_id +
                                             "' produced a non-finite score");
    mean += s;
  }
  mean /= static_cast<double>(training_scores.size());
  double var = 0.0;
  for (const double s : training_scores) {
    var += (s - mean) * (s - mean);
  }
  var /= static_cast<double>(training_scores.size());
  const double std_dev = std::sqrt(var);
  // Near-constant scores are treated as zero deviation.
  if (std_dev < 1e-12 * std::max(1.0, std::abs(mean))) {
    ThrowData("system '" + system_id +
                  "' produced constant training scores, cannot z-norm",
              ErrorCode::kZeroVariance);
  }
  return {mean, std_dev};
}

double ApplyZnorm(const ZnormStats& stats, double score) {
  CADENCE_CHECK_DATA(stats.std_dev > 0.0,
                     "normalization statistics are not fitted");
  return (score - stats.mean) / stats.std_dev;
}

ScoreTable FuseAll(const ScoreTable& table, const std::string& fused_id) {
  ScoreTable out;
  for (const SubjectRows& group : GroupBySubject(table)) {
    double sum = 0.0;
    for (const ScoreRow* row : group.rows) sum += row->znormed;
    out.rows.push_back(
        FusedRow(group, fused_id, sum / group.rows.size()));
  }
  return out;
}

ScoreTable FuseByModality(const ScoreTable& table,
                          const std::string& fused_id) {
  ScoreTable out;
  const std::vector<SubjectRows> groups = GroupBySubject(table);
  for (const SubjectRows& group : groups) {
    double speech_sum = 0.0;
    double text_sum = 0.0;
    int speech_n = 0;
    int text_n = 0;
    for (const ScoreRow* row : group.rows) {
      if (row->modality == Modality::kSpeech) {
        speech_sum += row->znormed;
        ++speech_n;
      } else {
        text_sum += row->znormed;
        ++text_n;
      }
    }
    if (speech_n == 0 || text_n == 0) {
      ThrowData("modality fusion needs at least one speech and one text "
                "system; subject '" +
                    group.subject_id + "' lacks one",
                ErrorCode::kMissingScore);
    }
    const double fused =
        0.5 * (speech_sum / speech_n + text_sum / text_n);
    out.rows.push_back(FusedRow(group, fused_id, fused));
  }
  return out;
}

ConfusionCounts CountDecisions(const std::vector<int>& truth,
                               const std::vector<int>& decision) {
  CADENCE_CHECK_DATA(!truth.empty() && truth.size() == decision.size(),
                     "decision and truth lists must match and be non-empty");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CADENCE_CHECK_DATA((truth[i] == 0 || truth[i] == 1) &&
                           (decision[i] == 0 || decision[i] == 1),
                       "labels and decisions must be 0 or 1");
    if (truth[i] == 1) {
      decision[i] == 1 ? ++counts.tp : ++counts.fn;
    } else {
      decision[i] == 1 ? ++counts.fp : ++counts.tn;
    }
  }
  return counts;
}

MetricReport ComputeMetrics(const ConfusionCounts& counts) {
  CADENCE_CHECK_DATA(counts.tp >= 0 && counts.fp >= 0 && counts.fn >= 0 &&
                         counts.tn >= 0,
                     "confusion counts must be non-negative");
  CADENCE_CHECK_DATA(counts.Total() > 0, "confusion counts are all zero");
  MetricReport report;
  report.counts = counts;
  report.positive = OneClassMetrics(counts.tp, counts.fp, counts.fn);
  report.negative = OneClassMetrics(counts.tn, counts.fn, counts.fp);
  report.accuracy =
      static_cast<double>(counts.tp + counts.tn) / counts.Total();
  return report;
}

RocCurve ComputeRoc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  CADENCE_CHECK_DATA(!scores.empty() && scores.size() == labels.size(),
                     "scores and labels must match and be non-empty");
  int n_pos = 0;
  int n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CADENCE_CHECK_DATA(std::isfinite(scores[i]), "scores must be finite");
    CADENCE_CHECK_DATA(labels[i] == 0 || labels[i] == 1,
                       "labels must be 0 or 1");
    labels[i] == 1 ? ++n_pos : ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0) {
    ThrowData("ROC needs both classes present", ErrorCode::kEmptyInput);
  }

  // Rank statistic with average ranks across tie groups.
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  RocCurve curve;
  curve.auc = (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) /
              (static_cast<double>(n_pos) * n_neg);

  // One point per distinct threshold, walking from the highest score.
  curve.points.push_back(
      {std::numeric_limits<double>::infinity(), 0.0, 0.0});
  int tp = 0;
  int fp = 0;
  std::size_t k = order.size();
  while (k > 0) {
    const double value = scores[order[k - 1]];
    while (k > 0 && scores[order[k - 1]] == value) {
      labels[order[k - 1]] == 1 ? ++tp : ++fp;
      --k;
    }
    curve.points.push_back({value, static_cast<double>(fp) / n_neg,
                            static_cast<double>(tp) / n_pos});
  }
  return curve;
}

double TrapezoidArea(const std::vector<RocPoint>& points) {
  CADENCE_CHECK_DATA(points.size() >= 2,
                     "trapezoid area needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) *
            (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

MetricReport EvaluateSystem(const ScoreTable& table,
                            const std::string& system_id,
                            const std::map<std::string, int>& labels,
                            DecisionRule rule) {
  const std::vector<const ScoreRow*> rows = table.RowsForSystem(system_id);
  CADENCE_CHECK_DATA(!rows.empty(), "no scores recorded for system '" +
                                        system_id + "'");
  std::vector<int> truth;
  std::vector<int> decision;
  std::vector<double> znormed;
  for (const ScoreRow* row : rows) {
    const auto it = labels.find(row->subject_id);
    if (it == labels.end()) {
      ThrowData("no label for subject '" + row->subject_id + "'",
                ErrorCode::kMissingScore);
    }
    truth.push_back(it->second);
    decision.push_back(rule == DecisionRule::kRawAtHalf
                           ? (row->raw >= 0.5 ? 1 : 0)
                           : (row->znormed >= 0.0 ? 1 : 0));
    znormed.push_back(row->znormed);
  }
  MetricReport report = ComputeMetrics(CountDecisions(truth, decision));
  report.roc = ComputeRoc(znormed, truth);
  return report;
}

ScoreTable LosoRun(const std::vector<std::string>& subject_ids,
                   const std::vector<LosoSystem>& systems,
                   const LosoConfig& config) {
  const std::size_t n = subject_ids.size();
  CADENCE_CHECK_DATA(n >= 3, "leave-one-out needs at least three subjects");
  CADENCE_CHECK_DATA(
      std::set<std::string>(subject_ids.begin(), subject_ids.end()).size() ==
          n,
      "subject ids must be unique");
  CADENCE_CHECK_CONFIG(!systems.empty(), "no systems requested");
  std::set<std::string> ids;
  for (const LosoSystem& system : systems) {
    CADENCE_CHECK_CONFIG(static_cast<bool>(system.run_fold),
                         "system '" + system.id + "' has no fold runner");
    CADENCE_CHECK_CONFIG(ids.insert(system.id).second,
                         "duplicate system id '" + system.id + "'");
  }

  std::vector<std::vector<ScoreRow>> fold_rows(n);
  ParallelFor(n, config.jobs, [&](std::size_t fold) {
    std::vector<int> train;
    train.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != fold) train.push_back(static_cast<int>(i));
    }
    for (const LosoSystem& system : systems) {
      try {
        const FoldScores scores =
            system.run_fold(train, static_cast<int>(fold));
        CADENCE_CHECK_DATA(scores.train_scores.size() == train.size(),
                           "fold runner returned " +
                               std::to_string(scores.train_scores.size()) +
                               " training scores for " +
                               std::to_string(train.size()) + " subjects");
        const ZnormStats stats = FitZnorm(scores.train_scores, system.id);
        ScoreRow row;
        row.subject_id = subject_ids[fold];
        row.system_id = system.id;
        row.modality = system.modality;
        row.raw = scores.test_score;
        row.znormed = ApplyZnorm(stats, scores.test_score);
        row.fold = static_cast<int>(fold);
        fold_rows[fold].push_back(std::move(row));
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(),
                    "fold '" + subject_ids[fold] + "', system '" + system.id +
                        "': " + e.what());
      }
    }
  });

  ScoreTable table;
  for (std::vector<ScoreRow>& rows : fold_rows) {
    for (ScoreRow& row : rows) table.rows.push_back(std::move(row));
  }
  return table;
}

void WriteScoresCsv(const std::filesystem::path& path,
                    const ScoreTable& table) {
  std::vector<const ScoreRow*> rows;
  for (const ScoreRow& row : table.rows) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(),
            [](const ScoreRow* a, const ScoreRow* b) {
              if (a->system_id != b->system_id) {
                return a->system_id < b->system_id;
              }
              return a->subject_id < b->subject_id;
            });
  std::ofstream out = OpenForWrite(path);
  out << "subject,system,modality,raw,znormed,fold\n";
  for (const ScoreRow* row : rows) {
    CheckCsvField(row->subject_id);
    CheckCsvField(row->system_id);
    out << row->subject_id << ',' << row->system_id << ','
        << ModalityName(row->modality) << ',' << FormatDouble(row->raw) << ','
        << FormatDouble(row->znormed) << ',' << row->fold << '\n';
  }
  if (!out) {
    ThrowData("could not write file: " + path.string(),
              ErrorCode::kIoFailure);
  }
}

ScoreTable ReadScoresCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ThrowData("could not open scores file: " + path.string(),
              ErrorCode::kIoFailure);
  }
  std::string line;
  if (!std::getline(in, line) ||
      line != "subject,system,modality,raw,znormed,fold") {
    ThrowData("scores file has an unexpected header: " + path.string(),
              ErrorCode::kManifestInvalid);
  }
  ScoreTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      ThrowData("scores file line " + std::to_string(line_no) +
                    ": expected 6 fields, got " +
                    std::to_string(fields.size()),
                ErrorCode::kManifestInvalid);
    }
    ScoreRow row;
    row.subject_id = fields[0];
    row.system_id = fields[1];
    if (fields[2] == "speech") {
      row.modality = Modality::kSpeech;
    } else if (fields[2] == "text") {
      row.modality = Modality::kText;
    } else if (fields[2] == "fused") {
      row.modality = Modality::kFused;
    } else {
      ThrowData("scores file line " + std::to_string(line_no) +
                    ": unknown modality '" + fields[2] + "'",
                ErrorCode::kManifestInvalid);
    }
    try {
      row.raw = std::stod(fields[3]);
      row.znormed = std::stod(fields[4]);
      row.fold = std::stoi(fields[5]);
    } catch (const std::exception&) {
      ThrowData("scores file line " + std::to_string(line_no) +
                    ": malformed number",
                ErrorCode::kManifestInvalid);
    }
    table.rows.push_back(std::move(row));
  }
  CADENCE_CHECK_DATA(!table.rows.empty(),
                     "scores file has no rows: " + path.string());
  return table;
}

void WriteMetricsJson(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, MetricReport>>& by_system) {
  nlohmann::json root;
  root["schema_version"] = 1;
  root["systems"] = nlohmann::json::array();
  for (const auto& [id, report] : by_system) {
    nlohmann::json entry;
    entry["system"] = id;
    entry["counts"] = {{"tp", report.counts.tp},
                       {"fp", report.counts.fp},
                       {"fn", report.counts.fn},
                       {"tn", report.counts.tn}};
    entry["accuracy"] = JsonNum(report.accuracy);
    entry["auc"] = report.roc.points.empty() ? nlohmann::json(nullptr)
                                             : JsonNum(report.roc.auc);
    entry["positive_class"] = {{"precision", JsonNum(report.positive.precision)},
                               {"recall", JsonNum(report.positive.recall)},
                               {"f1", JsonNum(report.positive.f1)}};
    entry["negative_class"] = {{"precision", JsonNum(report.negative.precision)},
                               {"recall", JsonNum(report.negative.recall)},
                               {"f1", JsonNum(report.negative.f1)}};
    root["systems"].push_back(entry);
  }
  std::ofstream out = OpenForWrite(path);
  out << root.dump(2) << "\n";
  if (!out) {
    ThrowData("could not write file: " + path.string(),
              ErrorCode::kIoFailure);
  }
}

void WriteRocCsv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream out = OpenForWrite(path);
  out << "threshold,fpr,tpr\n";
  for (const RocPoint& p : curve.points) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.fpr) << ','
        << FormatDouble(p.tpr) << '\n';
  }
  if (!out) {
    ThrowData("could not write file: " + path.string(),
              ErrorCode::kIoFailure);
  }
}

void WriteRocSvg(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, RocCurve>>& curves) {
  CADENCE_CHECK_DATA(!curves.empty(), "no curves to plot");
  const double x0 = 70.0;
  const double x1 = 610.0;
  const double y0 = 430.0;  // svg y grows downward; y0 is the origin
  const double y1 = 40.0;
  const auto map_x = [&](double fpr) { return x0 + (x1 - x0) * fpr; };
  const auto map_y = [&](double tpr) { return y0 + (y1 - y0) * tpr; };
  const std::vector<std::string> palette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ofstream out = OpenForWrite(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" "
         "height=\"480\" viewBox=\"0 0 660 480\">\n";
  out << "<rect width=\"660\" height=\"480\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"340\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">Receiver operating "
         "characteristic</text>\n";
  // Axes with ticks every 0.25.
  out << "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<polyline points=\"" << FormatDouble(x0) << ',' << FormatDouble(y1)
      << ' ' << FormatDouble(x0) << ',' << FormatDouble(y0) << ' '
      << FormatDouble(x1) << ',' << FormatDouble(y0) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"12\" "
         "fill=\"#000000\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double frac = i * 0.25;
    out << "<text x=\"" << FormatDouble(map_x(frac)) << "\" y=\""
        << FormatDouble(y0 + 18.0) << "\" text-anchor=\"middle\">"
        << FormatDouble(frac) << "</text>\n";
    out << "<text x=\"" << FormatDouble(x0 - 8.0) << "\" y=\""
        << FormatDouble(map_y(frac) + 4.0) << "\" text-anchor=\"end\">"
        << FormatDouble(frac) << "</text>\n";
  }
  out << "<text x=\"340\" y=\"470\" text-anchor=\"middle\">False positive "
         "rate</text>\n";
  out << "<text x=\"18\" y=\"235\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 235)\">True positive rate</text>\n";
  out << "</g>\n";
  // Chance diagonal.
  out << "<line x1=\"" << FormatDouble(map_x(0.0)) << "\" y1=\""
      << FormatDouble(map_y(0.0)) << "\" x2=\"" << FormatDouble(map_x(1.0))
      << "\" y2=\"" << FormatDouble(map_y(1.0))
      << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const std::string& color = palette[c % palette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const RocPoint& p : curves[c].second.points) {
      out << FormatDouble(map_x(p.fpr)) << ',' << FormatDouble(map_y(p.tpr))
          << ' ';
    }
    out << "\"/>\n";
    // Legend entry.
    const double ly = y1 + 18.0 + 18.0 * static_cast<double>(c);
    out << "<line x1=\"" << FormatDouble(x0 + 14.0) << "\" y1=\""
        << FormatDouble(ly - 4.0) << "\" x2=\"" << FormatDouble(x0 + 42.0)
        << "\" y2=\"" << FormatDouble(ly - 4.0) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << FormatDouble(x0 + 48.0) << "\" y=\""
        << FormatDouble(ly) << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << curves[c].first << " (auc "
        << FormatDouble(curves[c].second.auc) << ")</text>\n";
  }
  out << "</svg>\n";
  if (!out) {
    ThrowData("could not write file: " + path.string(),
              ErrorCode::kIoFailure);
  }
}

}  // namespace cadence::evaluation
