#pragma once

// LBP boosted-cascade training and multi-scale sliding-window detection, with
// hard negative mining and the confusion-matrix metric suite. Weak learners
// are single-bin threshold stumps over cell LBP histograms; each stage is an
// AdaBoost ensemble with a detection-rate-calibrated threshold.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panelbot/core.hpp"
#include "panelbot/image.hpp"
#include "panelbot/vision.hpp"

namespace panelbot::cascade {

using img::RasterImage;
using img::Rect;

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

struct NegativeImage {
    RasterImage image;
    std::vector<Rect> exclusions;  // boxes that must not be sampled as negatives
};

struct Dataset {
    std::vector<RasterImage> positives;  // normalized 100x100 windows
    std::vector<NegativeImage> negatives;
    std::vector<double> positive_boost;  // mining re-weights for missed positives

    std::size_t positive_count() const { return positives.size(); }
    std::size_t negative_count() const { return negatives.size(); }
};

// ---------------------------------------------------------------------------
// Cascade model
// ---------------------------------------------------------------------------

struct Stump {
    std::uint32_t feature = 0;  // (cell * 256 + bin) into the LBP histogram
    double threshold = 0.0;     // compared against the bin count
    int polarity = 1;           // +1: predict positive when count > threshold
    double weight = 0.0;        // AdaBoost alpha
};

struct CascadeStage {
    std::vector<Stump> stumps;
    double threshold = 0.0;  // stage passes iff the weighted vote sum >= threshold
};

struct Cascade {
    int window = vision::kLbpWindow;
    int cell_grid = 8;
    std::vector<CascadeStage> stages;

    bool trained() const { return !stages.empty(); }
};

using Features = std::vector<std::uint8_t>;  // cell-major bin counts

inline Features featurize(const RasterImage& window, int cell_grid) {
    const auto hist = vision::lbp_features(window, cell_grid);
    Features f(hist.bins.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>(hist.bins[i], 255));
    return f;
}

inline double stage_vote(const CascadeStage& stage, const Features& f) {
    double s = 0.0;
    for (const Stump& st : stage.stumps) {
        const double v = f[st.feature];
        const int h = (st.polarity * (v - st.threshold) > 0.0) ? 1 : -1;
        s += st.weight * h;
    }
    return s;
}

// Full-cascade decision with accumulated margin; a window rejected at stage k
// is rejected by the whole cascade.
inline bool classify(const Cascade& c, const Features& f, double* score = nullptr) {
    double margin = 0.0;
    for (const CascadeStage& stage : c.stages) {
        const double s = stage_vote(stage, f);
        if (s < stage.threshold) {
            if (score) *score = 0.0;
            return false;
        }
        margin += s - stage.threshold;
    }
    if (score) *score = margin;
    return true;
}

inline bool classify_window(const Cascade& c, const RasterImage& window, double* score = nullptr) {
    return classify(c, featurize(window, c.cell_grid), score);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct StageTargets {
    double detection_rate = 0.995;  // per stage, on training positives
    double fp_rate = 0.4;           // per stage, on the stage's negatives
    int min_stumps = 6;             // keeps stages selective enough to localize
    int max_stumps = 50;
};

struct TrainParams {
    int min_stages = 3;
    int max_stages = 10;
    StageTargets targets;
    std::size_t negatives_per_stage = 1500;
    std::size_t negative_pool = 8000;  // windows sampled and featurized upfront
    double overall_fp_target = 1e-4;
    std::size_t min_stage_negatives = 20;  // fewer passing negatives ends training
};

namespace detail {

struct StageData {
    // Feature-major matrix for fast stump scans.
    std::vector<std::uint8_t> columns;  // [feature * n + sample]
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::vector<int> labels;       // +1 / -1
    std::vector<double> weights;
};

inline StageData build_stage_data(const std::vector<Features>& pos,
                                  const std::vector<Features>& neg,
                                  const std::vector<double>& pos_boost) {
    StageData d;
    d.n_samples = pos.size() + neg.size();
    d.n_features = pos.empty() ? neg.front().size() : pos.front().size();
    d.columns.assign(d.n_features * d.n_samples, 0);
    d.labels.resize(d.n_samples);
    d.weights.resize(d.n_samples);

    for (std::size_t i = 0; i < pos.size(); ++i) {
        d.labels[i] = 1;
        const double boost = i < pos_boost.size() ? pos_boost[i] : 1.0;
        d.weights[i] = boost / (2.0 * pos.size());
        for (std::size_t f = 0; f < d.n_features; ++f)
            d.columns[f * d.n_samples + i] = pos[i][f];
    }
    for (std::size_t i = 0; i < neg.size(); ++i) {
        const std::size_t s = pos.size() + i;
        d.labels[s] = -1;
        d.weights[s] = 1.0 / (2.0 * neg.size());
        for (std::size_t f = 0; f < d.n_features; ++f)
            d.columns[f * d.n_samples + s] = neg[i][f];
    }
    double sum = 0.0;
    for (double w : d.weights) sum += w;
    for (double& w : d.weights) w /= sum;
    return d;
}

struct BestStump {
    Stump stump;
    double error = 1.0;
};

// Exhaustive stump search: per feature, a weighted histogram over the byte
// value range, then a prefix scan over candidate thresholds.
inline BestStump best_stump(const StageData& d) {
    BestStump best;
    std::array<double, 257> wpos{}, wneg{};

    for (std::size_t f = 0; f < d.n_features; ++f) {
        wpos.fill(0.0);
        wneg.fill(0.0);
        const std::uint8_t* col = &d.columns[f * d.n_samples];
        int vmax = 0;
        for (std::size_t i = 0; i < d.n_samples; ++i) {
            const int v = col[i];
            if (v > vmax) vmax = v;
            if (d.labels[i] > 0)
                wpos[v] += d.weights[i];
            else
                wneg[v] += d.weights[i];
        }
        double total_pos = 0.0, total_neg = 0.0;
        for (int v = 0; v <= vmax; ++v) {
            total_pos += wpos[v];
            total_neg += wneg[v];
        }
        // Threshold t = v + 0.5: "count > t" selects values above v.
        double pos_below = 0.0, neg_below = 0.0;
        for (int v = -1; v <= vmax; ++v) {
            if (v >= 0) {
                pos_below += wpos[v];
                neg_below += wneg[v];
            }
            // polarity +1: positive when value > t -> errors: pos below + neg above
            const double err_p1 = pos_below + (total_neg - neg_below);
            // polarity -1: positive when value < t
            const double err_m1 = (total_pos - pos_below) + neg_below;
            const double t = v + 0.5;
            if (err_p1 < best.error - 1e-15) {
                best.error = err_p1;
                best.stump = {static_cast<std::uint32_t>(f), t, 1, 0.0};
            }
            if (err_m1 < best.error - 1e-15) {
                best.error = err_m1;
                best.stump = {static_cast<std::uint32_t>(f), t, -1, 0.0};
            }
        }
    }
    return best;
}

}  // namespace detail

// AdaBoost one stage: adds stumps until the stage, thresholded for the target
// detection rate on positives, reaches the target false-positive rate.
inline CascadeStage train_stage(const std::vector<Features>& pos,
                                const std::vector<Features>& neg,
                                const std::vector<double>& pos_boost,
                                const StageTargets& targets, int stage_index) {
    auto d = detail::build_stage_data(pos, neg, pos_boost);
    CascadeStage stage;
    std::vector<double> votes(d.n_samples, 0.0);

    for (int t = 0; t < targets.max_stumps; ++t) {
        auto bs = detail::best_stump(d);
        const double eps = std::clamp(bs.error, 1e-10, 1.0 - 1e-10);
        bs.stump.weight = 0.5 * std::log((1.0 - eps) / eps);
        stage.stumps.push_back(bs.stump);

        // Weight update and accumulated votes.
        const std::uint8_t* col = &d.columns[bs.stump.feature * d.n_samples];
        double wsum = 0.0;
        for (std::size_t i = 0; i < d.n_samples; ++i) {
            const int h = (bs.stump.polarity * (col[i] - bs.stump.threshold) > 0.0) ? 1 : -1;
            votes[i] += bs.stump.weight * h;
            d.weights[i] *= std::exp(-bs.stump.weight * h * d.labels[i]);
            wsum += d.weights[i];
        }
        for (double& w : d.weights) w /= wsum;

        // Stage threshold at the detection-rate quantile of positive votes.
        std::vector<double> pos_votes(votes.begin(), votes.begin() + pos.size());
        std::sort(pos_votes.begin(), pos_votes.end());
        const std::size_t miss_allowed = static_cast<std::size_t>(
            std::floor((1.0 - targets.detection_rate) * static_cast<double>(pos.size())));
        stage.threshold = pos_votes[std::min(miss_allowed, pos_votes.size() - 1)];

        std::size_t false_pos = 0;
        for (std::size_t i = pos.size(); i < d.n_samples; ++i)
            if (votes[i] >= stage.threshold) ++false_pos;
        const double fpr = neg.empty() ? 0.0 : static_cast<double>(false_pos) / neg.size();
        if (fpr <= targets.fp_rate && t + 1 >= targets.min_stumps) return stage;
        if (bs.error >= 0.5 - 1e-12 && t >= 3) break;  // no separating power left
    }
    fail("training-failure",
         "stage " + std::to_string(stage_index) + " missed its false-positive target");
}

namespace detail {

// Draw a random square window from a negative image, avoiding exclusions.
inline bool sample_negative_window(const NegativeImage& ni, Rng& rng, RasterImage& out) {
    const int maxside = std::min(ni.image.width, ni.image.height);
    if (maxside < vision::kLbpWindow) return false;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const int side =
            vision::kLbpWindow +
            static_cast<int>(rng.below(static_cast<std::uint64_t>(maxside - vision::kLbpWindow + 1)));
        const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(ni.image.width - side + 1)));
        const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(ni.image.height - side + 1)));
        const Rect w{x, y, side, side};
        bool excluded = false;
        for (const Rect& ex : ni.exclusions)
            if (img::iou(w, ex) > 0.1 || ex.contains(x + side / 2, y + side / 2)) {
                excluded = true;
                break;
            }
        if (excluded) continue;
        RasterImage cropimg = img::crop(ni.image, w);
        out = (cropimg.width == vision::kLbpWindow && cropimg.height == vision::kLbpWindow)
                  ? cropimg
                  : img::resize_bilinear(cropimg, vision::kLbpWindow, vision::kLbpWindow);
        return true;
    }
    return false;
}

}  // namespace detail

inline Cascade train_cascade(const Dataset& data, const TrainParams& params, std::uint64_t seed) {
    require(data.positives.size() >= 50, "training-failure", "need at least 50 positives");
    require(!data.negatives.empty(), "training-failure", "need negative images");

    Cascade c;
    std::vector<Features> pos;
    pos.reserve(data.positives.size());
    for (const RasterImage& w : data.positives) {
        require(w.width == vision::kLbpWindow && w.height == vision::kLbpWindow,
                "contract-violation", "positives must be 100x100");
        pos.push_back(featurize(w, c.cell_grid));
    }

    // Fixed featurized negative pool; stages bootstrap from what still passes.
    Rng rng(derive_seed(seed, "negatives"));
    std::vector<Features> pool;
    pool.reserve(params.negative_pool);
    {
        std::size_t attempts = 0;
        const std::size_t budget = params.negative_pool * 8;
        while (pool.size() < params.negative_pool && attempts < budget) {
            ++attempts;
            const auto& ni = data.negatives[rng.below(data.negatives.size())];
            RasterImage window;
            if (detail::sample_negative_window(ni, rng, window))
                pool.push_back(featurize(window, c.cell_grid));
        }
    }
    require(pool.size() >= 200, "training-failure",
            "fewer than 200 negative windows extractable");

    double cumulative_fpr = 1.0;
    for (int stage_idx = 0; stage_idx < params.max_stages; ++stage_idx) {
        std::vector<Features> neg;
        for (const Features& f : pool) {
            if (neg.size() >= params.negatives_per_stage) break;
            if (classify(c, f)) neg.push_back(f);
        }
        if (neg.size() < params.min_stage_negatives) break;  // pool exhausted: done

        const CascadeStage stage =
            train_stage(pos, neg, data.positive_boost, params.targets, stage_idx);
        c.stages.push_back(stage);

        std::size_t fp = 0;
        for (const Features& f : neg)
            if (stage_vote(stage, f) >= stage.threshold) ++fp;
        cumulative_fpr *= neg.empty() ? 0.0 : static_cast<double>(fp) / neg.size();
        if (cumulative_fpr <= params.overall_fp_target && stage_idx + 1 >= params.min_stages)
            break;
    }
    require(c.trained(), "training-failure", "no stage could be trained");
    return c;
}

// ---------------------------------------------------------------------------
// Multi-scale detection
// ---------------------------------------------------------------------------

struct Detection {
    Rect bbox;
    double score = 0.0;
};

struct DetectParams {
    double scale_factor = 1.15;
    int stride = 6;        // pixels, at pyramid-level resolution
    int min_neighbors = 2;
    double group_iou = 0.3;
};

namespace detail {

// Per-level code image evaluator: stump features are counted lazily over the
// window's cell rectangle, skipping window-border pixels exactly like
// lbp_features does.
struct LevelCodes {
    std::vector<std::uint8_t> codes;
    int width = 0, height = 0;

    explicit LevelCodes(const RasterImage& im) : width(im.width), height(im.height) {
        codes.assign(static_cast<std::size_t>(width) * height, 0);
        for (int y = 1; y < height - 1; ++y)
            for (int x = 1; x < width - 1; ++x)
                codes[static_cast<std::size_t>(y) * width + x] = vision::lbp_code(im, x, y);
    }

    int count_bin(int wx, int wy, int cell_grid, std::uint32_t feature) const {
        const int cell = static_cast<int>(feature >> 8);
        const std::uint8_t bin = static_cast<std::uint8_t>(feature & 0xff);
        const int cx = cell % cell_grid, cy = cell / cell_grid;
        // Cell pixel ranges under p * grid / window mapping, clipped to the
        // window interior.
        auto cell_range = [&](int ci) {
            int lo = (ci * vision::kLbpWindow + cell_grid - 1) / cell_grid;
            int hi = ((ci + 1) * vision::kLbpWindow + cell_grid - 1) / cell_grid - 1;
            lo = std::max(lo, 1);
            hi = std::min(hi, vision::kLbpWindow - 2);
            return std::pair<int, int>{lo, hi};
        };
        const auto [x0, x1] = cell_range(cx);
        const auto [y0, y1] = cell_range(cy);
        int n = 0;
        for (int y = y0; y <= y1; ++y) {
            const std::uint8_t* row = &codes[static_cast<std::size_t>(wy + y) * width + wx];
            for (int x = x0; x <= x1; ++x) n += (row[x] == bin);
        }
        return n;
    }
};

inline bool classify_at(const Cascade& c, const LevelCodes& codes, int wx, int wy,
                        double* score) {
    double margin = 0.0;
    for (const CascadeStage& stage : c.stages) {
        double s = 0.0;
        for (const Stump& st : stage.stumps) {
            const double v = codes.count_bin(wx, wy, c.cell_grid, st.feature);
            s += st.weight * ((st.polarity * (v - st.threshold) > 0.0) ? 1 : -1);
        }
        if (s < stage.threshold) return false;
        margin += s - stage.threshold;
    }
    if (score) *score = margin;
    return true;
}

}  // namespace detail

inline std::vector<Detection> detect(const RasterImage& image, const Cascade& c,
                                     const DetectParams& params = {}) {
    require(c.trained(), "contract-violation", "detect with an untrained cascade");
    require(image.width >= c.window && image.height >= c.window, "contract-violation",
            "image smaller than the detector window");
    require(params.scale_factor > 1.0 && params.stride > 0, "contract-violation",
            "invalid detect parameters");

    std::vector<Detection> raw;
    double scale = 1.0;
    RasterImage level = image;
    while (level.width >= c.window && level.height >= c.window) {
        detail::LevelCodes codes(level);
        for (int y = 0; y + c.window <= level.height; y += params.stride) {
            for (int x = 0; x + c.window <= level.width; x += params.stride) {
                double score = 0.0;
                if (detail::classify_at(c, codes, x, y, &score)) {
                    Rect box{static_cast<int>(std::lround(x * scale)),
                             static_cast<int>(std::lround(y * scale)),
                             static_cast<int>(std::lround(c.window * scale)),
                             static_cast<int>(std::lround(c.window * scale))};
                    raw.push_back({box, score});
                }
            }
        }
        scale *= params.scale_factor;
        const int nw = static_cast<int>(std::lround(image.width / scale));
        const int nh = static_cast<int>(std::lround(image.height / scale));
        if (nw < c.window || nh < c.window) break;
        level = img::resize_bilinear(image, nw, nh);
    }

    // Group overlapping raw hits: connected components under IoU >= group_iou,
    // represented by the score-weighted mean box.
    std::vector<int> comp(raw.size(), -1);
    int ncomp = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = ncomp;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < raw.size(); ++b)
                if (comp[b] < 0 && img::iou(raw[a].bbox, raw[b].bbox) >= params.group_iou) {
                    comp[b] = ncomp;
                    stack.push_back(b);
                }
        }
        ++ncomp;
    }

    std::vector<Detection> grouped;
    for (int g = 0; g < ncomp; ++g) {
        double sw = 0.0, x = 0.0, y = 0.0, w = 0.0, h = 0.0;
        int members = 0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (comp[i] != g) continue;
            const double wgt = std::max(raw[i].score, 1e-9);
            sw += wgt;
            x += wgt * raw[i].bbox.x;
            y += wgt * raw[i].bbox.y;
            w += wgt * raw[i].bbox.w;
            h += wgt * raw[i].bbox.h;
            ++members;
        }
        if (members < params.min_neighbors) continue;
        Detection d;
        d.bbox = {static_cast<int>(std::lround(x / sw)), static_cast<int>(std::lround(y / sw)),
                  static_cast<int>(std::lround(w / sw)), static_cast<int>(std::lround(h / sw))};
        d.score = sw;
        grouped.push_back(d);
    }
    std::sort(grouped.begin(), grouped.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
        return a.bbox.x < b.bbox.x;
    });

    // Greedy suppression of residual near-duplicates across pyramid scales.
    std::vector<Detection> kept;
    for (const Detection& d : grouped) {
        bool duplicate = false;
        for (const Detection& k : kept) {
            const bool center_inside = k.bbox.contains(d.bbox.x + d.bbox.w / 2,
                                                       d.bbox.y + d.bbox.h / 2);
            if (img::iou(d.bbox, k.bbox) >= params.group_iou || center_inside) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(d);
    }
    return kept;
}

// ---------------------------------------------------------------------------
// Hard negative mining
// ---------------------------------------------------------------------------

struct MiningResult {
    Dataset dataset;
    Cascade cascade;
};

// Per round: detections on negative images become new negative windows, missed
// positives are re-weighted, and the cascade is retrained.
inline MiningResult hard_negative_mine(const Cascade& initial, const Dataset& data, int rounds,
                                       const TrainParams& params, std::uint64_t seed) {
    require(rounds >= 1, "contract-violation", "mining needs at least 1 round");
    MiningResult r{data, initial};
    if (r.dataset.positive_boost.size() != r.dataset.positives.size())
        r.dataset.positive_boost.assign(r.dataset.positives.size(), 1.0);

    for (int round = 0; round < rounds; ++round) {
        std::size_t added = 0;
        const std::size_t count = r.dataset.negatives.size();
        for (std::size_t idx = 0; idx < count; ++idx) {
            const NegativeImage ni = r.dataset.negatives[idx];  // appended below
            if (ni.image.width < r.cascade.window || ni.image.height < r.cascade.window) continue;
            for (const Detection& det : detect(ni.image, r.cascade)) {
                bool excluded = false;
                for (const Rect& ex : ni.exclusions)
                    if (img::iou(det.bbox, ex) > 0.1) excluded = true;
                if (excluded) continue;
                RasterImage win = img::crop(ni.image, det.bbox);
                if (win.width < 8 || win.height < 8) continue;
                r.dataset.negatives.push_back(
                    {img::resize_bilinear(win, vision::kLbpWindow, vision::kLbpWindow), {}});
                ++added;
            }
        }
        if (added == 0) break;  // nothing mined: dataset unchanged from here on

        // Missed positives are boosted rather than duplicated.
        for (std::size_t i = 0; i < r.dataset.positives.size(); ++i)
            if (!classify_window(r.cascade, r.dataset.positives[i]))
                r.dataset.positive_boost[i] = std::min(8.0, r.dataset.positive_boost[i] * 2.0);

        r.cascade = train_cascade(r.dataset, params,
                                  derive_seed(seed, "mining-round-" + std::to_string(round)));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MetricsReport {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f2 = 0.0;
};

inline MetricsReport metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp,
                                         std::size_t fn) {
    MetricsReport m{tp, tn, fp, fn};
    const double total = static_cast<double>(tp + tn + fp + fn);
    require(total > 0.0, "undefined-metric", "metrics of empty input");
    m.accuracy = static_cast<double>(tp + tn) / total;
    m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double denom = 4.0 * m.precision + m.recall;
    m.f2 = denom > 0.0 ? 5.0 * m.precision * m.recall / denom : 0.0;
    return m;
}

inline MetricsReport evaluate(const std::vector<bool>& predictions,
                              const std::vector<bool>& labels) {
    require(predictions.size() == labels.size(), "contract-violation",
            "prediction/label length mismatch");
    require(!predictions.empty(), "undefined-metric", "evaluate on empty input");
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] && labels[i]) ++tp;
        else if (predictions[i] && !labels[i]) ++fp;
        else if (!predictions[i] && labels[i]) ++fn;
        else ++tn;
    }
    return metrics_from_counts(tp, tn, fp, fn);
}

// ---------------------------------------------------------------------------
// Serialization (versioned structured text)
// ---------------------------------------------------------------------------

inline std::string serialize_cascade(const Cascade& c) {
    std::ostringstream out;
    out << "cascade v1\n";
    out << "window " << c.window << "\n";
    out << "cell_grid " << c.cell_grid << "\n";
    out << "stages " << c.stages.size() << "\n";
    char buf[96];
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
        const CascadeStage& s = c.stages[i];
        std::snprintf(buf, sizeof(buf), "stage %zu stumps %zu threshold %.17g\n", i,
                      s.stumps.size(), s.threshold);
        out << buf;
        for (const Stump& st : s.stumps) {
            std::snprintf(buf, sizeof(buf), "stump %u %.17g %d %.17g\n", st.feature,
                          st.threshold, st.polarity, st.weight);
            out << buf;
        }
    }
    return out.str();
}

inline Cascade parse_cascade(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    Cascade c;
    in >> word;
    require(word == "cascade", "config-error", "not a cascade file");
    in >> word;
    require(word == "v1", "config-error", "unsupported cascade version " + word);
    std::size_t nstages = 0;
    in >> word >> c.window >> word >> c.cell_grid >> word >> nstages;
    require(in.good() && c.window > 0 && c.cell_grid > 0, "config-error",
            "malformed cascade header");
    for (std::size_t i = 0; i < nstages; ++i) {
        std::size_t idx = 0, nstumps = 0;
        CascadeStage s;
        in >> word >> idx >> word >> nstumps >> word >> s.threshold;
        require(!in.fail(), "config-error", "malformed cascade stage header");
        for (std::size_t k = 0; k < nstumps; ++k) {
            Stump st;
            in >> word >> st.feature >> st.threshold >> st.polarity >> st.weight;
            require(!in.fail() && word == "stump", "config-error", "malformed stump row");
            s.stumps.push_back(st);
        }
        c.stages.push_back(std::move(s));
    }
    return c;
}

inline void save_cascade(const Cascade& c, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "config-error", "cannot open " + path + " for writing");
    f << serialize_cascade(c);
}

inline Cascade load_cascade(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "config-error", "cannot open cascade " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_cascade(ss.str());
}

}  // namespace panelbot::cascade
