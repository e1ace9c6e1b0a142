/*
 * SPDX-FileCopyrightText: Copyright 2026 The Mercury Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mercury/report.hpp"

#include "mercury/archmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mercury {

std::string format_real(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_labels(const LabelSeq &s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i)
            out += ' ';
        out += std::to_string(s[i]);
    }
    return out;
}

void write_eval_csv(std::ostream &os, const Dataset &ds, const EvalReport &r) {
    os << "trace,arch_id,placement,truth,prediction,OER\n";
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
        const ManifestEntry &e = ds.manifest.entries[r.indices[k]];
        os << e.trace_path << ',' << e.arch_id << ',' << to_string(e.placement) << ','
           << format_labels(e.labels) << ',' << format_labels(r.predictions[k]) << ','
           << format_real(r.per_trace_oer[k]) << '\n';
    }
}

void write_noise_csv(std::ostream &os, std::span<const NoiseRow> rows) {
    os << "SNR(dB),OER,Loss\n";
    for (const NoiseRow &r : rows) {
        if (std::isinf(r.snr_db))
            os << "No noise";
        else
            os << format_real(r.snr_db);
        os << ',' << format_real(r.oer) << ',' << format_real(r.loss) << '\n';
    }
}

void write_placement_csv(std::ostream &os,
                         const std::map<seq2seq::ModelKind, std::vector<PlacementRow>> &by_kind) {
    os << "TDC location,OER (RNN) w/o.,OER (RNN) w/.,OER (Transformer) w/o.,OER (Transformer) w/.\n";
    std::vector<PlacementName> order;
    for (const auto &[kind, rows] : by_kind)
        for (const PlacementRow &r : rows)
            if (std::find(order.begin(), order.end(), r.placement) == order.end())
                order.push_back(r.placement);
    const seq2seq::ModelKind kinds[] = {seq2seq::ModelKind::RnnCtc, seq2seq::ModelKind::Transformer};
    for (PlacementName p : order) {
        os << to_string(p);
        for (auto kind : kinds) {
            const PlacementRow *row = nullptr;
            if (auto it = by_kind.find(kind); it != by_kind.end())
                for (const PlacementRow &r : it->second)
                    if (r.placement == p)
                        row = &r;
            os << ',' << (row ? format_real(row->oer_without) : "");
            os << ',' << (row && row->oer_with ? format_real(*row->oer_with) : "");
        }
        os << '\n';
    }
}

AblationRow best_of(const std::string &value, const std::vector<seq2seq::EpochStats> &curves) {
    if (curves.empty())
        throw std::invalid_argument("best_of: no epochs");
    AblationRow r;
    r.value = value;
    r.best_loss_train = r.best_loss_test = r.best_oer_train = r.best_oer_test =
        std::numeric_limits<double>::infinity();
    for (const auto &s : curves) {
        r.best_loss_train = std::min(r.best_loss_train, s.train_loss);
        r.best_loss_test = std::min(r.best_loss_test, s.test_loss);
        r.best_oer_train = std::min(r.best_oer_train, s.train_oer);
        r.best_oer_test = std::min(r.best_oer_test, s.test_oer);
    }
    return r;
}

void write_ablation_csv(std::ostream &os, const std::string &param, std::span<const AblationRow> rows) {
    os << param << ",Best Loss Train,Best Loss Test,Best OER Train,Best OER Test\n";
    for (const AblationRow &r : rows)
        os << r.value << ',' << format_real(r.best_loss_train) << ',' << format_real(r.best_loss_test)
           << ',' << format_real(r.best_oer_train) << ',' << format_real(r.best_oer_test) << '\n';
}

void write_localization_csv(std::ostream &os, const Dataset &ds, std::span<const std::size_t> indices,
                            std::span<const Localization> results) {
    if (indices.size() != results.size())
        throw std::invalid_argument("write_localization_csv: size mismatch");
    os << "trace,arch_id,truth,prediction,hits,checks,hit_rate,first_argmax_window,first_is_early\n";
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const ManifestEntry &e = ds.manifest.entries[indices[k]];
        const Localization &l = results[k];
        os << e.trace_path << ',' << e.arch_id << ',' << format_labels(e.labels) << ','
           << format_labels(l.predicted) << ',' << l.hits << ',' << l.checks << ','
           << format_real(l.hit_rate) << ',' << l.first_argmax_window << ','
           << (l.first_is_early ? 1 : 0) << '\n';
    }
}

namespace {

std::string xml_escape(const std::string &s) {
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

} // namespace

std::string attention_svg(const Eigen::MatrixXd &reduced, const LabelSeq &predicted,
                          const std::string &title) {
    constexpr int cell = 24, left = 120, top = 40, bottom = 30;
    const int rows = static_cast<int>(reduced.rows());
    const int cols = static_cast<int>(reduced.cols());
    const int width = left + cols * cell + 10;
    const int height = top + rows * cell + bottom;
    const double peak = reduced.size() ? reduced.maxCoeff() : 0.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"monospace\" font-size=\"11\">\n";
    os << "<text x=\"4\" y=\"16\">" << xml_escape(title) << "</text>\n";
    for (int r = 0; r < rows; ++r) {
        std::string name = "EOS";
        if (r < static_cast<int>(predicted.size()))
            name = describe(layer_of_label(predicted[r]));
        os << "<text x=\"4\" y=\"" << top + r * cell + cell * 2 / 3 << "\">" << xml_escape(name)
           << "</text>\n";
        for (int c = 0; c < cols; ++c) {
            const double v = peak > 0 ? reduced(r, c) / peak : 0.0;
            const int g = static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
            os << "<rect x=\"" << left + c * cell << "\" y=\"" << top + r * cell << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"rgb(" << g << ',' << g << ',' << g
               << ")\"><title>" << format_real(reduced(r, c)) << "</title></rect>\n";
        }
    }
    for (int c = 0; c < cols; ++c)
        os << "<text x=\"" << left + c * cell + 4 << "\" y=\"" << top + rows * cell + 16 << "\">" << c
           << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string &path, const std::string &text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

} // namespace mercury
