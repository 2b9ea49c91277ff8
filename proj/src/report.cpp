#include "converse/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "converse/csv.hpp"
#include "converse/error.hpp"

namespace converse {

namespace {

std::string num(double v) { return csv::number(v, 6); }
std::string px(double v) { return csv::number(v, 2); }

std::string stance_name(std::optional<Stance> s) { return s ? std::string(to_string(*s)) : std::string(); }

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // x index, y in [0, 1]
};

// Line chart over categorical x positions 0..labels-1 with y in [0, 1].
std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                       const std::string& x_title, const std::string& y_title,
                       const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, L = 60, R = 150, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  const double n = static_cast<double>(std::max<std::size_t>(x_labels.size(), 2) - 1);
  auto xp = [&](double x) { return L + pw * x / n; };
  auto yp = [&](double y) { return T + ph * (1.0 - y); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(W / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = k / 4.0;
    o << "<line x1=\"" << px(L) << "\" y1=\"" << px(yp(y)) << "\" x2=\"" << px(L + pw) << "\" y2=\""
      << px(yp(y)) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << px(L - 6) << "\" y=\"" << px(yp(y) + 4) << "\" text-anchor=\"end\">"
      << csv::number(y, 2) << "</text>\n";
  }
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    o << "<text x=\"" << px(xp(static_cast<double>(i))) << "\" y=\"" << px(T + ph + 18)
      << "\" text-anchor=\"middle\">" << x_labels[i] << "</text>\n";
  }
  o << "<line x1=\"" << px(L) << "\" y1=\"" << px(T + ph) << "\" x2=\"" << px(L + pw) << "\" y2=\""
    << px(T + ph) << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << px(L) << "\" y1=\"" << px(T) << "\" x2=\"" << px(L) << "\" y2=\"" << px(T + ph)
    << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << px(L + pw / 2) << "\" y=\"" << px(H - 15) << "\" text-anchor=\"middle\">" << x_title
    << "</text>\n";
  o << "<text x=\"15\" y=\"" << px(T + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
    << px(T + ph / 2) << ")\">" << y_title << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string path;
    for (const auto& [x, y] : series[s].points) {
      path += (path.empty() ? "" : " ") + px(xp(x)) + "," + px(yp(y));
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << path << "\"/>\n";
    for (const auto& [x, y] : series[s].points) {
      o << "<circle cx=\"" << px(xp(x)) << "\" cy=\"" << px(yp(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << px(L + pw + 15) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(L + pw + 35) << "\" y2=\""
      << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << px(L + pw + 40) << "\" y=\"" << px(ly + 4) << "\">" << series[s].name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string stance_predictions_csv(std::span<const ThreadPrediction> predictions) {
  std::string out = "thread_id,tweet_id,depth,gold,pred,p_support,p_deny,p_query,p_comment\n";
  for (const auto& p : predictions) {
    for (std::size_t i = 0; i < p.tweet_ids.size(); ++i) {
      out += csv::escape(p.thread_id) + "," + csv::escape(p.tweet_ids[i]) + "," + std::to_string(p.depths[i]) +
             "," + stance_name(p.gold_stances[i]) + "," + std::string(to_string(p.stances[i]));
      for (double v : p.stance_probs[i]) out += "," + num(v);
      out += "\n";
    }
  }
  return out;
}

std::string veracity_predictions_csv(std::span<const ThreadPrediction> predictions) {
  std::string out = "thread_id,gold,pred,p_true,p_false,p_unverified\n";
  for (const auto& p : predictions) {
    out += csv::escape(p.thread_id) + "," +
           (p.gold_veracity ? std::string(to_string(*p.gold_veracity)) : std::string()) + "," +
           std::string(to_string(p.veracity));
    for (double v : p.veracity_probs) out += "," + num(v);
    out += "\n";
  }
  return out;
}

std::string attribution_csv(std::span<const ThreadPrediction> predictions) {
  std::string out = "thread_id,tweet_id,dims_won\n";
  for (const auto& p : predictions) {
    for (std::size_t i = 0; i < p.tweet_ids.size() && i < p.dims_won.size(); ++i) {
      out += csv::escape(p.thread_id) + "," + csv::escape(p.tweet_ids[i]) + "," + std::to_string(p.dims_won[i]) + "\n";
    }
  }
  return out;
}

StanceTableRow stance_row(std::string method, const MetricSummary& s) {
  StanceTableRow r;
  r.method = std::move(method);
  r.macro_f1 = s.macro_f1;
  for (std::size_t c = 0; c < kStanceClasses && c < s.per_class_f1.size(); ++c) r.f1[c] = s.per_class_f1[c];
  r.accuracy = s.accuracy;
  return r;
}

std::string stance_table_csv(std::span<const StanceTableRow> rows) {
  std::string out = "method,macro_f1,f_s,f_d,f_q,f_c,acc\n";
  for (const auto& r : rows) {
    out += csv::escape(r.method) + "," + num(r.macro_f1);
    for (double f : r.f1) out += "," + num(f);
    out += "," + num(r.accuracy) + "\n";
  }
  return out;
}

std::string veracity_table_csv(std::span<const VeracityTableRow> rows) {
  std::string out = "method,dataset,macro_f1,acc\n";
  for (const auto& r : rows) {
    out += csv::escape(r.method) + "," + csv::escape(r.dataset) + "," + num(r.macro_f1) + "," + num(r.accuracy) + "\n";
  }
  return out;
}

std::string depth_table_csv(std::span<const NamedDepthReport> rows) {
  std::string out = "method,depth,tweets,macro_f1\n";
  for (const auto& r : rows) {
    for (const auto& b : r.report.buckets) {
      out += csv::escape(r.method) + "," + b.label + "," + std::to_string(b.metrics.items) + "," +
             num(b.metrics.macro_f1) + "\n";
    }
  }
  return out;
}

std::string sweep_csv(const SweepCurve& curve) {
  std::string out = "lambda,macro_f1,f_false,f_unverified,acc\n";
  for (const auto& p : curve.points) {
    out += num(p.lambda) + "," + num(p.macro_f1) + "," + num(p.f_false) + "," + num(p.f_unverified) + "," +
           num(p.accuracy) + "\n";
  }
  return out;
}

std::string stance_over_time_csv(std::span<const StanceTimeRow> rows) {
  std::string out = "veracity,bucket,tweets,support,deny,query,comment\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.veracity)) + "," + std::to_string(r.bucket) + "," + std::to_string(r.tweets);
    for (double p : r.proportions) out += "," + num(p);
    out += "\n";
  }
  return out;
}

std::vector<StanceTableRow> published_stance_rows() {
  StanceTableRow r;
  r.method = "published: Conversational-GCN (L=2)";
  r.macro_f1 = 0.499;
  r.f1 = {0.311, 0.194, 0.646, 0.847};
  r.accuracy = 0.751;
  return {r};
}

std::vector<VeracityTableRow> published_veracity_rows() {
  return {
      {"published: Hierarchical GCN-RNN", "semeval", 0.540, 0.536},
      {"published: Hierarchical GCN-RNN", "pheme", 0.317, 0.356},
      {"published: Hierarchical-PSV", "semeval", 0.588, 0.643},
      {"published: Hierarchical-PSV", "pheme", 0.333, 0.361},
      {"published: Hierarchical-PSV - stance features", "pheme", 0.299, 0.338},
      {"published: Hierarchical-PSV - GRU + CNN", "pheme", 0.312, 0.328},
      {"published: Hierarchical-PSV - GRU", "pheme", 0.288, 0.326},
  };
}

std::vector<NamedDepthReport> published_depth_rows() {
  const std::array<double, kDepthBuckets> ours = {0.381, 0.468, 0.467, 0.480, 0.672, 0.321, 0.438};
  const std::array<double, kDepthBuckets> original = {0.481, 0.363, 0.297, 0.300, 0.548, 0.292, 0.337};
  auto make = [](std::string name, const std::array<double, kDepthBuckets>& values) {
    NamedDepthReport r;
    r.method = std::move(name);
    for (std::size_t b = 0; b < kDepthBuckets; ++b) {
      DepthBucket bucket;
      bucket.bucket = b;
      bucket.label = depth_bucket_label(b);
      bucket.metrics.macro_f1 = values[b];
      r.report.buckets.push_back(bucket);
    }
    return r;
  };
  return {make("published: Conversational-GCN", ours), make("published: Original-GCN", original)};
}

std::string stance_over_time_svg(std::span<const StanceTimeRow> rows) {
  std::size_t buckets = 1;
  for (const auto& r : rows) buckets = std::max(buckets, r.bucket + 1);
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < buckets; ++b) labels.push_back(std::to_string(b + 1));
  // One panel per veracity class, stacked vertically.
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"1200\">\n";
  for (std::size_t v = 0; v < kVeracityClasses; ++v) {
    std::vector<Series> series;
    for (std::size_t s = 0; s < kStanceClasses; ++s) {
      Series line{std::string(to_string(static_cast<Stance>(s))), {}};
      for (const auto& r : rows) {
        if (static_cast<std::size_t>(r.veracity) == v) line.points.emplace_back(static_cast<double>(r.bucket), r.proportions[s]);
      }
      series.push_back(std::move(line));
    }
    const std::string title = std::string(to_string(static_cast<Veracity>(v))) + " rumors";
    out += "<g transform=\"translate(0," + std::to_string(400 * v) + ")\">\n" +
           line_chart(title, labels, "time bucket", "proportion", series) + "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string depth_buckets_svg(std::span<const NamedDepthReport> rows) {
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < kDepthBuckets; ++b) labels.push_back(depth_bucket_label(b));
  std::vector<Series> series;
  for (const auto& r : rows) {
    Series s{xml_escape(r.method), {}};
    for (const auto& b : r.report.buckets) s.points.emplace_back(static_cast<double>(b.bucket), b.metrics.macro_f1);
    series.push_back(std::move(s));
  }
  return line_chart("Stance macro-F1 by depth", labels, "depth", "macro-F1", series);
}

std::string sweep_svg(const SweepCurve& curve) {
  std::vector<std::string> labels;
  Series macro{"macro-F1", {}}, f_false{"F false", {}}, f_unv{"F unverified", {}};
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    labels.push_back(csv::number(p.lambda, 2));
    macro.points.emplace_back(static_cast<double>(i), p.macro_f1);
    f_false.points.emplace_back(static_cast<double>(i), p.f_false);
    f_unv.points.emplace_back(static_cast<double>(i), p.f_unverified);
  }
  return line_chart("Veracity vs lambda", labels, "lambda", "F1", {macro, f_false, f_unv});
}

std::string attribution_svg(const ThreadPrediction& p) {
  constexpr double cell = 70, top = 50;
  const double width = 40 + cell * static_cast<double>(std::max<std::size_t>(p.tweet_ids.size(), 1));
  std::size_t most = 1;
  for (std::size_t d : p.dims_won) most = std::max(most, d);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"170\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"20\" y=\"25\" font-size=\"13\">" << xml_escape(p.thread_id) << " (predicted "
    << to_string(p.veracity) << ")</text>\n";
  for (std::size_t i = 0; i < p.tweet_ids.size() && i < p.dims_won.size(); ++i) {
    const double x = 20 + cell * static_cast<double>(i);
    const double shade = static_cast<double>(p.dims_won[i]) / static_cast<double>(most);
    const int level = static_cast<int>(255.0 - 200.0 * shade);
    o << "<rect x=\"" << px(x) << "\" y=\"" << px(top) << "\" width=\"" << px(cell - 6) << "\" height=\"50\" fill=\"rgb("
      << level << "," << level << ",255)\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(x + (cell - 6) / 2) << "\" y=\"" << px(top + 30) << "\" text-anchor=\"middle\">"
      << p.dims_won[i] << "</text>\n";
    o << "<text x=\"" << px(x + (cell - 6) / 2) << "\" y=\"" << px(top + 70) << "\" text-anchor=\"middle\">"
      << to_string(p.stances[i]) << "</text>\n";
    o << "<text x=\"" << px(x + (cell - 6) / 2) << "\" y=\"" << px(top + 88) << "\" text-anchor=\"middle\">t"
      << i << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace converse
