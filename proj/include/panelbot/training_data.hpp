#pragma once

// Synthetic detector datasets built from seeded panel renders: head (or
// valve) crops as positives, renders with exclusion boxes plus bare-panel
// renders as negatives, and 70/30 train/test window splits for scoring.

#include <string>
#include <vector>

#include "panelbot/cascade.hpp"
#include "panelbot/core.hpp"
#include "panelbot/scenario_gen.hpp"
#include "panelbot/scene.hpp"

namespace panelbot::cascade {

enum class DetectorKind { Wrench, Valve };

struct DatasetParams {
    int scenes = 50;
    DetectorKind kind = DetectorKind::Wrench;
    double render_noise_sigma = 6.0;
    double render_gradient = 14.0;
    int jitter_per_positive = 2;  // extra shifted/scaled crops per sample
};

namespace detail {
// Window quantization tolerance: shifted/scaled variants of a truth crop.
inline void push_positive_crops(Dataset& data, const img::RasterImage& frame,
                                const img::Rect& box, int jitters, Rng& rng) {
    img::Rect b = box;
    if (img::clip_rect(b, frame.width, frame.height)) return;  // partly off-view
    data.positives.push_back(
        img::resize_bilinear(img::crop(frame, b), vision::kLbpWindow, vision::kLbpWindow));
    // Scale-only jitter: pyramid steps quantize scale, the stride covers shift.
    for (int j = 0; j < jitters; ++j) {
        img::Rect jb = box;
        const double grow = (j % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.04, 0.09);
        const int d = static_cast<int>(std::lround(grow * box.w));
        jb.x -= d / 2;
        jb.y -= d / 2;
        jb.w += d;
        jb.h += d;
        if (img::clip_rect(jb, frame.width, frame.height)) continue;
        if (jb.w < 16 || jb.h < 16) continue;
        data.positives.push_back(img::resize_bilinear(img::crop(frame, jb), vision::kLbpWindow,
                                                      vision::kLbpWindow));
    }
}
}  // namespace detail

inline Dataset build_dataset(const DatasetParams& params, std::uint64_t seed) {
    Dataset data;
    Rng jitter_rng = derived_rng(seed, "jitter");
    for (int s = 0; s < params.scenes; ++s) {
        const std::uint64_t scene_seed = derive_seed(seed, "dataset-scene-" + std::to_string(s));
        sim::GenParams gp;
        gp.render_noise_sigma = params.render_noise_sigma;
        gp.render_gradient = params.render_gradient;
        const auto sc = sim::generate_scenario(gp, scene_seed);
        const auto cam = sim::make_camera(sc.scene);
        const auto truth = sim::compute_truth(sc.scene, cam);
        const auto frame =
            sim::render_panel_image(sc.scene, cam, derive_seed(scene_seed, "render"));

        std::vector<img::Rect> head_boxes;
        for (const auto& wt : truth.wrenches) head_boxes.push_back(wt.head_bbox);
        img::Rect valve_box{
            static_cast<int>(truth.valve.center_u - 0.9 * truth.valve.edge_px),
            static_cast<int>(truth.valve.center_v - 0.9 * truth.valve.edge_px),
            static_cast<int>(1.8 * truth.valve.edge_px),
            static_cast<int>(1.8 * truth.valve.edge_px)};

        if (params.kind == DetectorKind::Wrench) {
            for (const img::Rect& box : head_boxes)
                detail::push_positive_crops(data, frame, box, params.jitter_per_positive,
                                            jitter_rng);
            auto exclusions = head_boxes;
            data.negatives.push_back({frame, std::move(exclusions)});
        } else {
            detail::push_positive_crops(data, frame, valve_box, params.jitter_per_positive,
                                        jitter_rng);
            data.negatives.push_back({frame, {valve_box}});
        }

        // Bare board render: pure background negatives.
        if (s % 2 == 0) {
            sim::PanelSceneSpec bare = sc.scene;
            bare.wrenches_on_front = false;
            data.negatives.push_back(
                {sim::render_panel_image(bare, cam, derive_seed(scene_seed, "bare")), {}});
        }
    }
    data.positive_boost.assign(data.positives.size(), 1.0);
    return data;
}

// 70/30 split of the positives plus a sampled negative window probe set.
struct SplitDataset {
    Dataset train;
    std::vector<img::RasterImage> test_positives;
    std::vector<img::RasterImage> test_negatives;
};

inline SplitDataset split_dataset(const Dataset& data, double train_fraction,
                                  std::size_t test_negative_windows, std::uint64_t seed) {
    SplitDataset out;
    Rng rng = derived_rng(seed, "split");

    std::vector<std::size_t> order(data.positives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t n_train =
        static_cast<std::size_t>(train_fraction * static_cast<double>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < n_train)
            out.train.positives.push_back(data.positives[order[i]]);
        else
            out.test_positives.push_back(data.positives[order[i]]);
    }

    // Negative IMAGES split by index; windows for the probe set come from the
    // held-out images only.
    std::vector<NegativeImage> test_negative_images;
    for (std::size_t i = 0; i < data.negatives.size(); ++i) {
        if (i % 10 < 7)
            out.train.negatives.push_back(data.negatives[i]);
        else
            test_negative_images.push_back(data.negatives[i]);
    }
    std::size_t guard = 0;
    while (out.test_negatives.size() < test_negative_windows &&
           guard < 100 * test_negative_windows && !test_negative_images.empty()) {
        ++guard;
        const auto& ni = test_negative_images[rng.below(test_negative_images.size())];
        img::RasterImage window;
        if (cascade::detail::sample_negative_window(ni, rng, window))
            out.test_negatives.push_back(std::move(window));
    }
    out.train.positive_boost.assign(out.train.positives.size(), 1.0);
    return out;
}

inline MetricsReport score_cascade(const Cascade& c,
                                   const std::vector<img::RasterImage>& positives,
                                   const std::vector<img::RasterImage>& negatives) {
    std::vector<bool> predictions, labels;
    for (const auto& w : positives) {
        predictions.push_back(classify_window(c, w));
        labels.push_back(true);
    }
    for (const auto& w : negatives) {
        predictions.push_back(classify_window(c, w));
        labels.push_back(false);
    }
    return evaluate(predictions, labels);
}

}  // namespace panelbot::cascade
