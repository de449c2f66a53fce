#include "aquacast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aquacast/errors.hpp"
#include "aquacast/expansion.hpp"

namespace aquacast {

namespace {

// A prediction re-entering the rolling window: clamped to >= 0 in raw
// units, re-scaled, and classified against the frozen centers.
struct Reentry {
  double raw;
  double scaled;
  int cls;  // -1 when the model has no class features
};

Reentry reenter(double scaled_pred, const Scaler& scaler,
                const KMeansModel* kmeans) {
  Reentry r{};
  r.raw = std::max(0.0, scaler.invert(scaled_pred));
  r.scaled = scaler.transform(r.raw);
  r.cls = kmeans ? assign_index(r.raw, kmeans->centers) : -1;
  return r;
}

int class_of_scaled(double scaled, const Scaler& scaler,
                    const KMeansModel& kmeans) {
  return assign_index(scaler.invert(scaled), kmeans.centers);
}

void fill_row(nn::Matrix& step, Eigen::Index row, double scaled, int cls,
              int m) {
  step(row, 0) = scaled;
  for (int c = 0; c < m; ++c) step(row, 1 + c) = (c == cls) ? 1.0 : 0.0;
}

const KMeansModel* require_kmeans(const Model& model,
                                  const KMeansModel* kmeans) {
  if (model.m_classes > 0) {
    if (kmeans == nullptr)
      throw std::invalid_argument("model has class features but no centers");
    if (kmeans->m() != model.m_classes)
      throw std::invalid_argument("class count mismatch");
  }
  return kmeans;
}

// Forward a batch of windows stored as row lists. windows[b] has
// `steps` rows of width 1+m, like FeatureWindow::rows.
nn::Matrix forward_windows(const Model& model,
                           std::span<const nn::Matrix> windows) {
  const int steps = model.sequence_steps();
  const int width = model.feature_width();
  const auto batch = static_cast<Eigen::Index>(windows.size());
  nn::Sequence seq(steps);
  for (int t = 0; t < steps; ++t) {
    seq[t].resize(batch, width);
    for (Eigen::Index b = 0; b < batch; ++b) seq[t].row(b) = windows[b].row(t);
  }
  return model.net.forward(seq);
}

nn::Sequence grun_branch_sequence(std::span<const double> scaled_lags_recent_first) {
  // Feed the GRU oldest-first.
  nn::Sequence seq(5);
  for (int t = 0; t < 5; ++t) {
    seq[t].resize(1, 1);
    seq[t](0, 0) = scaled_lags_recent_first[4 - t];
  }
  return seq;
}

}  // namespace

FeatureWindow assemble_window(std::span<const double> scaled_history,
                              int expected_steps, const KMeansModel* kmeans,
                              const Scaler& scaler) {
  if (static_cast<int>(scaled_history.size()) != expected_steps)
    throw std::invalid_argument("window history length mismatch");
  const int m = kmeans ? kmeans->m() : 0;
  FeatureWindow window;
  window.rows.resize(expected_steps, 1 + m);
  for (int t = 0; t < expected_steps; ++t) {
    const int cls =
        kmeans ? class_of_scaled(scaled_history[t], scaler, *kmeans) : -1;
    window.rows(t, 0) = scaled_history[t];
    for (int c = 0; c < m; ++c) window.rows(t, 1 + c) = (c == cls) ? 1.0 : 0.0;
  }
  return window;
}

double predict_one(const Model& model, const FeatureWindow& window,
                   const Scaler& scaler, const KMeansModel* kmeans) {
  if (model.kind == ModelKind::GRUN)
    throw std::invalid_argument("GRUN takes the lag-window overload");
  if (window.steps() != model.sequence_steps() ||
      window.width() != model.feature_width())
    throw std::invalid_argument("window does not match model spec");

  if (model.kind != ModelKind::EDCGRU || model.rho == 0) {
    const nn::Matrix out = forward_windows(model, {&window.rows, 1});
    return reenter(out(0, 0), scaler, nullptr).raw;
  }

  require_kmeans(model, kmeans);
  nn::Matrix rows = window.rows;
  const int steps = model.sequence_steps();
  Reentry last{};
  for (int phase = 0; phase <= model.rho; ++phase) {
    const nn::Matrix out = forward_windows(model, {&rows, 1});
    last = reenter(out(0, 0), scaler, kmeans);
    if (phase < model.rho) {
      // Roll the window one step and append the virtual value.
      rows.topRows(steps - 1) = rows.bottomRows(steps - 1).eval();
      fill_row(rows, steps - 1, last.scaled, last.cls, model.m_classes);
    }
  }
  return last.raw;
}

double predict_one(const Model& model, const GRUNFeatureWindow& window,
                   const Scaler& scaler) {
  if (model.kind != ModelKind::GRUN)
    throw std::invalid_argument("lag windows are a GRUN input");
  std::array<double, 5> recent, near, distant;
  for (int i = 0; i < 5; ++i) {
    recent[i] = scaler.transform(window.recent[i]);
    near[i] = scaler.transform(window.near[i]);
    distant[i] = scaler.transform(window.distant[i]);
  }
  std::vector<nn::Sequence> inputs;
  inputs.push_back(grun_branch_sequence(recent));
  inputs.push_back(grun_branch_sequence(near));
  inputs.push_back(grun_branch_sequence(distant));
  const nn::Matrix out = model.net.forward(inputs);
  return reenter(out(0, 0), scaler, nullptr).raw;
}

double predict_one_at(const Model& model, std::span<const double> series,
                      std::size_t target, const Scaler& scaler,
                      const KMeansModel* kmeans) {
  const auto history = static_cast<std::size_t>(model.history_len());
  if (target < history || target > series.size())
    throw DataError("insufficient history at the requested index");
  require_kmeans(model, kmeans);

  switch (model.kind) {
    case ModelKind::BGRU:
    case ModelKind::DCGRU: {
      std::vector<double> scaled(kSamplesPerDay);
      for (int j = 0; j < kSamplesPerDay; ++j)
        scaled[j] = scaler.transform(series[target - kSamplesPerDay + j]);
      const FeatureWindow w =
          assemble_window(scaled, kSamplesPerDay, kmeans, scaler);
      return predict_one(model, w, scaler, kmeans);
    }
    case ModelKind::EDCGRU: {
      const std::size_t tail = history;  // 96 + 1 actual readings
      const ExpandedSeries e =
          expand(series.subspan(target - tail, tail), model.rho);
      const int steps = model.sequence_steps();
      std::vector<double> scaled(steps);
      // Drop the leading expanded value; the window ends at the last
      // actual reading.
      for (int j = 0; j < steps; ++j)
        scaled[j] = scaler.transform(e.values[e.values.size() - steps + j]);
      const FeatureWindow w = assemble_window(scaled, steps, kmeans, scaler);
      return predict_one(model, w, scaler, kmeans);
    }
    case ModelKind::GRUN:
      return predict_one(model, extract_grun_window(series, target), scaler);
  }
  throw std::logic_error("unreachable");
}

std::vector<double> predict_scenario1(const Model& model,
                                      std::span<const double> series,
                                      std::size_t first, std::size_t count,
                                      const Scaler& scaler,
                                      const KMeansModel* kmeans,
                                      int batch_size) {
  const auto history = static_cast<std::size_t>(model.history_len());
  if (first < history || first + count > series.size() + 1)
    throw DataError("scenario-1 target range outside usable history");
  if (batch_size < 1) throw std::invalid_argument("batch_size >= 1");
  require_kmeans(model, kmeans);
  std::vector<double> preds;
  preds.reserve(count);
  if (count == 0) return preds;

  const int m = model.m_classes;
  const int width = model.feature_width();

  if (model.kind == ModelKind::BGRU || model.kind == ModelKind::DCGRU) {
    // Scale and classify the needed slice once.
    const std::size_t base = first - kSamplesPerDay;
    const std::size_t n = kSamplesPerDay + count - 1;
    std::vector<double> scaled(n);
    std::vector<int> cls(m > 0 ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = scaler.transform(series[base + i]);
      if (m > 0) cls[i] = class_of_scaled(scaled[i], scaler, *kmeans);
    }
    nn::Sequence seq(kSamplesPerDay);
    for (std::size_t at = 0; at < count; at += batch_size) {
      const auto take = static_cast<Eigen::Index>(
          std::min<std::size_t>(batch_size, count - at));
      for (int t = 0; t < kSamplesPerDay; ++t) {
        seq[t].resize(take, width);
        for (Eigen::Index b = 0; b < take; ++b) {
          const std::size_t i = at + b + t;
          fill_row(seq[t], b, scaled[i], m > 0 ? cls[i] : -1, m);
        }
      }
      const nn::Matrix out = model.net.forward(seq);
      for (Eigen::Index b = 0; b < take; ++b)
        preds.push_back(reenter(out(b, 0), scaler, nullptr).raw);
    }
    return preds;
  }

  if (model.kind == ModelKind::GRUN) {
    std::vector<double> scaled(series.size());
    for (std::size_t i = first - history; i < first + count - 1 && i < series.size(); ++i)
      scaled[i] = scaler.transform(series[i]);
    const int(*lag_sets[3])[5] = {&kGrunRecentLags, &kGrunNearLags,
                                  &kGrunDistantLags};
    std::vector<nn::Sequence> inputs(3);
    for (std::size_t at = 0; at < count; at += batch_size) {
      const auto take = static_cast<Eigen::Index>(
          std::min<std::size_t>(batch_size, count - at));
      for (int br = 0; br < 3; ++br) {
        inputs[br].resize(5);
        for (int t = 0; t < 5; ++t) {
          inputs[br][t].resize(take, 1);
          for (Eigen::Index b = 0; b < take; ++b) {
            const std::size_t target = first + at + b;
            inputs[br][t](b, 0) = scaled[target - (*lag_sets[br])[4 - t]];
          }
        }
      }
      const nn::Matrix out = model.net.forward(inputs);
      for (Eigen::Index b = 0; b < take; ++b)
        preds.push_back(reenter(out(b, 0), scaler, nullptr).raw);
    }
    return preds;
  }

  // EDCGRU: expand the actual prefix once, then run rho+1 phases per
  // batch, rolling each window over its own virtual predictions.
  const int rho = model.rho;
  const int steps = model.sequence_steps();
  const std::size_t prefix = first + count - 1;  // actual readings known
  const ExpandedSeries e = expand(series.first(prefix), rho);
  const std::size_t en = e.values.size();
  std::vector<double> scaled(en);
  std::vector<int> cls(m > 0 ? en : 0);
  for (std::size_t i = 0; i < en; ++i) {
    scaled[i] = scaler.transform(e.values[i]);
    if (m > 0) cls[i] = class_of_scaled(scaled[i], scaler, *kmeans);
  }

  nn::Sequence seq(steps);
  std::vector<std::vector<Reentry>> extras;
  for (std::size_t at = 0; at < count; at += batch_size) {
    const auto take = static_cast<Eigen::Index>(
        std::min<std::size_t>(batch_size, count - at));
    extras.assign(take, {});
    for (int phase = 0; phase <= rho; ++phase) {
      for (int t = 0; t < steps; ++t) seq[t].resize(take, width);
      for (Eigen::Index b = 0; b < take; ++b) {
        const std::size_t target = first + at + b;
        // Window ends at the last actual reading before the target,
        // shifted forward by one per completed phase.
        const std::size_t e_end = expanded_index(target - 1, rho);
        for (int t = 0; t < steps; ++t) {
          const std::size_t q = e_end + 1 + phase + t - steps;
          if (q <= e_end)
            fill_row(seq[t], b, scaled[q], m > 0 ? cls[q] : -1, m);
          else
            fill_row(seq[t], b, extras[b][q - e_end - 1].scaled,
                     extras[b][q - e_end - 1].cls, m);
        }
      }
      const nn::Matrix out = model.net.forward(seq);
      for (Eigen::Index b = 0; b < take; ++b) {
        const Reentry r = reenter(out(b, 0), scaler, kmeans);
        if (phase < rho)
          extras[b].push_back(r);
        else
          preds.push_back(r.raw);
      }
    }
  }
  return preds;
}

namespace {

ForecastResult predict_day_impl(const Model& model,
                                std::span<const double> history,
                                const KMeansModel* kmeans,
                                const Scaler& scaler,
                                std::span<const double> actuals,
                                bool use_correction) {
  const auto needed = static_cast<std::size_t>(model.history_len());
  if (history.size() < needed) throw DataError("insufficient history");
  if (!actuals.empty() && actuals.size() != kSamplesPerDay)
    throw std::invalid_argument("actuals must cover the full day");
  require_kmeans(model, kmeans);

  ForecastResult result;
  result.scenario = 2;
  result.predicted.reserve(kSamplesPerDay);

  const int m = model.m_classes;
  const int width = model.feature_width();

  if (model.kind == ModelKind::GRUN) {
    // Rolling scaled history; predictions re-enter scaled and clamped.
    std::vector<double> rolling(history.end() - kGrunHistory, history.end());
    for (double& v : rolling) v = scaler.transform(v);
    std::array<double, 5> recent, near, distant;
    std::vector<nn::Sequence> inputs(3);
    for (int step = 0; step < kSamplesPerDay; ++step) {
      const std::size_t t = rolling.size();
      for (int i = 0; i < 5; ++i) {
        recent[i] = rolling[t - kGrunRecentLags[i]];
        near[i] = rolling[t - kGrunNearLags[i]];
        distant[i] = rolling[t - kGrunDistantLags[i]];
      }
      inputs[0] = grun_branch_sequence(recent);
      inputs[1] = grun_branch_sequence(near);
      inputs[2] = grun_branch_sequence(distant);
      const nn::Matrix out = model.net.forward(inputs);
      const Reentry r = reenter(out(0, 0), scaler, nullptr);
      result.predicted.push_back(r.raw);
      rolling.push_back(r.scaled);
      ++result.internal_steps;
    }
    if (use_correction && model.correction)
      result.predicted =
          apply_correction(result.predicted, *model.correction, scaler);
  } else {
    // Rolling window of (scaled, class) rows, expanded for EDCGRU.
    const int steps = model.sequence_steps();
    const int internal = (model.kind == ModelKind::EDCGRU)
                             ? kSamplesPerDay * (model.rho + 1)
                             : kSamplesPerDay;
    nn::Matrix rows(steps, width);
    if (model.kind == ModelKind::EDCGRU && model.rho > 0) {
      const ExpandedSeries e =
          expand(history.last(needed), model.rho);
      for (int t = 0; t < steps; ++t) {
        const double s =
            scaler.transform(e.values[e.values.size() - steps + t]);
        fill_row(rows, t, s, m > 0 ? class_of_scaled(s, scaler, *kmeans) : -1,
                 m);
      }
    } else {
      for (int t = 0; t < steps; ++t) {
        const double s = scaler.transform(history[history.size() - steps + t]);
        fill_row(rows, t, s, m > 0 ? class_of_scaled(s, scaler, *kmeans) : -1,
                 m);
      }
    }

    const int keep_every = (model.kind == ModelKind::EDCGRU) ? model.rho + 1 : 1;
    for (int step = 1; step <= internal; ++step) {
      const nn::Matrix out = forward_windows(model, {&rows, 1});
      const Reentry r = reenter(out(0, 0), scaler, kmeans);
      ++result.internal_steps;
      if (step % keep_every == 0) result.predicted.push_back(r.raw);
      rows.topRows(steps - 1) = rows.bottomRows(steps - 1).eval();
      fill_row(rows, steps - 1, r.scaled, r.cls, m);
    }
  }

  if (!actuals.empty()) {
    result.abs_errors.resize(kSamplesPerDay);
    for (int i = 0; i < kSamplesPerDay; ++i)
      result.abs_errors[i] = std::abs(actuals[i] - result.predicted[i]);
  }
  return result;
}

}  // namespace

ForecastResult predict_day(const Model& model, std::span<const double> history,
                           const KMeansModel* kmeans, const Scaler& scaler,
                           std::span<const double> actuals) {
  return predict_day_impl(model, history, kmeans, scaler, actuals,
                          /*use_correction=*/true);
}

std::vector<double> apply_correction(std::span<const double> day_prediction,
                                     const nn::Network& correction,
                                     const Scaler& scaler) {
  if (day_prediction.size() != kSamplesPerDay)
    throw std::invalid_argument("correction input must be one day");
  nn::Sequence seq(1);
  seq[0].resize(1, kSamplesPerDay);
  for (int i = 0; i < kSamplesPerDay; ++i)
    seq[0](0, i) = scaler.transform(day_prediction[i]);
  const nn::Matrix out = correction.forward(seq);
  std::vector<double> corrected(kSamplesPerDay);
  for (int i = 0; i < kSamplesPerDay; ++i)
    corrected[i] = std::max(0.0, scaler.invert(out(0, i)));
  return corrected;
}

nn::WindowDataset build_windows(const Model& model,
                                std::span<const double> series,
                                const Scaler& scaler,
                                const KMeansModel* kmeans,
                                std::size_t first_target,
                                std::size_t end_target) {
  require_kmeans(model, kmeans);
  if (end_target > series.size())
    throw DataError("target range exceeds the series");
  const int m = model.m_classes;

  if (model.kind == ModelKind::GRUN) {
    if (first_target < kGrunHistory)
      throw DataError("GRUN targets need 194 readings of history");
    nn::WindowDataset set({{5, 1}, {5, 1}, {5, 1}});
    std::vector<double> scaled(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
      scaled[i] = scaler.transform(series[i]);
    std::vector<double> buf(15);
    for (std::size_t t = first_target; t < end_target; ++t) {
      for (int j = 0; j < 5; ++j) {
        buf[j] = scaled[t - kGrunRecentLags[4 - j]];
        buf[5 + j] = scaled[t - kGrunNearLags[4 - j]];
        buf[10 + j] = scaled[t - kGrunDistantLags[4 - j]];
      }
      const double target = scaled[t];
      set.add(buf, {&target, 1});
    }
    return set;
  }

  const int steps = model.sequence_steps();
  const int width = model.feature_width();
  const int rho = (model.kind == ModelKind::EDCGRU) ? model.rho : 0;

  // Work on the expanded series (identity when rho = 0) and translate the
  // actual-index target range into expanded positions. A virtual value is
  // a usable target only once both its interpolation sources are known,
  // hence the (end_target - 1) cap.
  const ExpandedSeries e = expand(series, rho);
  std::vector<double> scaled(e.values.size());
  std::vector<int> cls(m > 0 ? e.values.size() : 0);
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    scaled[i] = scaler.transform(e.values[i]);
    if (m > 0) cls[i] = class_of_scaled(scaled[i], scaler, *kmeans);
  }

  const std::size_t first = expanded_index(first_target, rho);
  const std::size_t end = expanded_index(end_target - 1, rho) + 1;
  if (first < static_cast<std::size_t>(steps))
    throw DataError("targets need a full window of history");

  nn::WindowDataset set({{steps, width}});
  std::vector<double> buf(static_cast<std::size_t>(steps) * width);
  for (std::size_t t = first; t < end; ++t) {
    for (int j = 0; j < steps; ++j) {
      const std::size_t i = t - steps + j;
      buf[static_cast<std::size_t>(j) * width] = scaled[i];
      for (int c = 0; c < m; ++c)
        buf[static_cast<std::size_t>(j) * width + 1 + c] =
            (c == cls[i]) ? 1.0 : 0.0;
    }
    const double target = scaled[t];
    set.add(buf, {&target, 1});
  }
  return set;
}

nn::WindowDataset build_correction_windows(const Model& grun,
                                           std::span<const double> series,
                                           const Scaler& scaler,
                                           std::size_t first_target,
                                           std::size_t end_target) {
  if (grun.kind != ModelKind::GRUN)
    throw std::invalid_argument("correction pairs are a GRUN artifact");
  if (first_target < kGrunHistory)
    throw DataError("correction days need 194 readings of history");
  if (end_target > series.size())
    throw DataError("target range exceeds the series");

  nn::WindowDataset set({{1, kSamplesPerDay}}, kSamplesPerDay);
  std::vector<double> inputs(kSamplesPerDay), targets(kSamplesPerDay);
  for (std::size_t s = first_target; s + kSamplesPerDay <= end_target;
       s += kSamplesPerDay) {
    const ForecastResult day =
        predict_day_impl(grun, series.first(s), nullptr, scaler, {},
                         /*use_correction=*/false);
    for (int i = 0; i < kSamplesPerDay; ++i) {
      inputs[i] = scaler.transform(day.predicted[i]);
      targets[i] = scaler.transform(series[s + i]);
    }
    set.add(inputs, targets);
  }
  if (set.empty()) throw DataError("no full day in the correction range");
  return set;
}

void save_predictions_csv(const std::string& path,
                          std::int64_t first_timestamp,
                          std::span<const double> predicted,
                          std::span<const double> actuals) {
  if (!actuals.empty() && actuals.size() != predicted.size())
    throw std::invalid_argument("actuals length mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << (actuals.empty() ? "timestamp,predicted\n"
                          : "timestamp,predicted,actual,abs_error\n");
  char buf[96];
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::string ts =
        format_iso8601(first_timestamp + static_cast<std::int64_t>(i) *
                                             kIntervalSeconds);
    if (actuals.empty()) {
      std::snprintf(buf, sizeof(buf), "%.12g", predicted[i]);
      out << ts << ',' << buf << '\n';
    } else {
      char b2[32], b3[32];
      std::snprintf(buf, sizeof(buf), "%.12g", predicted[i]);
      std::snprintf(b2, sizeof(b2), "%.12g", actuals[i]);
      std::snprintf(b3, sizeof(b3), "%.12g",
                    std::abs(actuals[i] - predicted[i]));
      out << ts << ',' << buf << ',' << b2 << ',' << b3 << '\n';
    }
  }
}

}  // namespace aquacast
