#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "panelbot/training_data.hpp"

using namespace panelbot;
using cascade::Cascade;
using cascade::Dataset;
using img::RasterImage;

namespace {

// Bright centered blob vs flat noise: linearly separable by LBP statistics.
Dataset separable_dataset(std::size_t n_pos, std::size_t n_neg_images, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n_pos; ++i) {
        RasterImage w(100, 100, 30);
        const int cx = 50, cy = 50, r = 28;
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) w.at(x, y) = 220;
        for (auto& v : w.intensity)
            v = static_cast<std::uint8_t>(std::clamp(v + rng.uniform(-6.0, 6.0), 0.0, 255.0));
        d.positives.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < n_neg_images; ++i) {
        RasterImage im(220, 180);
        for (auto& v : im.intensity) v = static_cast<std::uint8_t>(80 + rng.below(60));
        d.negatives.push_back({std::move(im), {}});
    }
    d.positive_boost.assign(d.positives.size(), 1.0);
    return d;
}

const testfix::TrainedFixture& fixture() { return testfix::trained_wrench_detector(); }

}  // namespace

TEST_CASE("evaluate: all-correct predictions") {
    std::vector<bool> p(40, true), l(40, true);
    for (int i = 0; i < 10; ++i) {
        p.push_back(false);
        l.push_back(false);
    }
    const auto m = cascade::evaluate(p, l);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f2 == 1.0);
}

TEST_CASE("evaluate: worked confusion table") {
    const auto m = cascade::metrics_from_counts(97, 93, 3, 7);
    CHECK(m.precision == Catch::Approx(0.97).margin(1e-12));
    CHECK(m.recall == Catch::Approx(97.0 / 104.0).margin(1e-12));
    CHECK(m.recall == Catch::Approx(0.9327).margin(5e-5));
    CHECK(m.f2 == Catch::Approx(0.9399).margin(5e-5));
    CHECK(m.accuracy == Catch::Approx(190.0 / 200.0).margin(1e-12));
}

TEST_CASE("evaluate: empty input rejected, random tables match direct arithmetic") {
    CHECK_THROWS_AS(cascade::evaluate({}, {}), Error);
    Rng rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t tp = rng.below(50), tn = rng.below(50);
        const std::size_t fp = rng.below(50), fn = rng.below(50);
        if (tp + tn + fp + fn == 0) continue;
        std::vector<bool> pred, lab;
        for (std::size_t i = 0; i < tp; ++i) { pred.push_back(true); lab.push_back(true); }
        for (std::size_t i = 0; i < fp; ++i) { pred.push_back(true); lab.push_back(false); }
        for (std::size_t i = 0; i < fn; ++i) { pred.push_back(false); lab.push_back(true); }
        for (std::size_t i = 0; i < tn; ++i) { pred.push_back(false); lab.push_back(false); }
        const auto m = cascade::evaluate(pred, lab);
        // Direct arithmetic of the defining ratios.
        const double total = static_cast<double>(tp + tn + fp + fn);
        CHECK(m.accuracy == static_cast<double>(tp + tn) / total);
        if (tp + fp) CHECK(m.precision == static_cast<double>(tp) / (tp + fp));
        if (tp + fn) CHECK(m.recall == static_cast<double>(tp) / (tp + fn));
        if (m.precision + m.recall > 0)
            CHECK(m.f2 == Catch::Approx(5.0 * m.precision * m.recall /
                                        (4.0 * m.precision + m.recall)));
        // F2 sits between precision and recall.
        if (m.precision > 0 && m.recall > 0) {
            CHECK(m.f2 >= std::min(m.precision, m.recall) - 1e-12);
            CHECK(m.f2 <= std::max(m.precision, m.recall) + 1e-12);
        }
    }
}

TEST_CASE("train_cascade: separable set trains one stage with zero error") {
    const auto data = separable_dataset(60, 8, 11);
    cascade::TrainParams params;
    params.min_stages = 1;
    params.negative_pool = 1500;
    const auto c = cascade::train_cascade(data, params, 5);
    CHECK(c.stages.size() == 1);
    for (const auto& w : data.positives) CHECK(cascade::classify_window(c, w));
    // Windows sampled from the flat negatives must all reject.
    Rng rng(9);
    int rejected = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
        RasterImage win;
        if (!cascade::detail::sample_negative_window(data.negatives[rng.below(8)], rng, win))
            continue;
        ++total;
        if (!cascade::classify_window(c, win)) ++rejected;
    }
    CHECK(total > 0);
    CHECK(rejected == total);
}

TEST_CASE("train_cascade: too few positives rejected") {
    const auto data = separable_dataset(10, 4, 3);
    CHECK_THROWS_AS(cascade::train_cascade(data, {}, 1), Error);
}

TEST_CASE("train_cascade: held-out F2 at least 0.90 on rendered heads") {
    const auto& f = fixture();
    const auto m =
        cascade::score_cascade(f.cascade, f.split.test_positives, f.split.test_negatives);
    INFO("tp " << m.tp << " fp " << m.fp << " fn " << m.fn << " tn " << m.tn);
    CHECK(m.f2 >= 0.90);
}

TEST_CASE("train_cascade: bit-stable retraining and serialization round-trip") {
    const auto data = separable_dataset(60, 8, 21);
    cascade::TrainParams params;
    params.min_stages = 1;
    params.negative_pool = 1000;
    const auto a = cascade::train_cascade(data, params, 31);
    const auto b = cascade::train_cascade(data, params, 31);
    CHECK(cascade::serialize_cascade(a) == cascade::serialize_cascade(b));

    const auto text = cascade::serialize_cascade(a);
    const auto parsed = cascade::parse_cascade(text);
    CHECK(cascade::serialize_cascade(parsed) == text);
}

TEST_CASE("cascade monotonicity: a stage rejection rejects overall") {
    const auto& f = fixture();
    const auto& c = f.cascade;
    Rng rng(77);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        RasterImage win;
        const auto& ni = f.split.train.negatives[rng.below(f.split.train.negatives.size())];
        if (ni.image.width < 100 || ni.image.height < 100) continue;
        if (!cascade::detail::sample_negative_window(ni, rng, win)) continue;
        const auto feats = cascade::featurize(win, c.cell_grid);
        bool rejected_at_stage = false;
        for (const auto& stage : c.stages)
            if (cascade::stage_vote(stage, feats) < stage.threshold) rejected_at_stage = true;
        if (rejected_at_stage) {
            CHECK_FALSE(cascade::classify(c, feats));
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("detect: blank image yields nothing, same image twice is identical") {
    const auto& f = fixture();
    const RasterImage blank(320, 240, 200);
    CHECK(cascade::detect(blank, f.cascade).empty());

    const auto sc = sim::generate_scenario({}, 321);
    const auto cam = sim::make_camera(sc.scene);
    const auto frame = sim::render_panel_image(sc.scene, cam, 4);
    const auto a = cascade::detect(frame, f.cascade);
    const auto b = cascade::detect(frame, f.cascade);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bbox.x == b[i].bbox.x);
        CHECK(a[i].bbox.y == b[i].bbox.y);
        CHECK(a[i].score == b[i].score);
    }
}

TEST_CASE("detect: six wrench heads give six detections with IoU >= 0.5") {
    const auto& f = fixture();
    int total_matched = 0;
    std::size_t total_detections = 0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto sc = sim::generate_scenario({}, 900 + s);
        const auto cam = sim::make_camera(sc.scene);
        const auto frame = sim::render_panel_image(sc.scene, cam, derive_seed(s, "det"));
        const auto truth = sim::compute_truth(sc.scene, cam);
        const auto dets = cascade::detect(frame, f.cascade);
        total_detections += dets.size();
        for (const auto& wt : truth.wrenches) {
            double best = 0.0;
            for (const auto& d : dets) best = std::max(best, img::iou(d.bbox, wt.head_bbox));
            if (best >= 0.5) ++total_matched;
        }
    }
    CHECK(total_matched >= 17);  // 18 heads over 3 scenes, one slip allowed
    CHECK(total_detections <= 19);
}

TEST_CASE("hard_negative_mine: no false positives leaves the dataset unchanged") {
    // A detector that rejects everything on its negatives mines nothing.
    const auto data = separable_dataset(60, 8, 41);
    cascade::TrainParams params;
    params.min_stages = 1;
    params.negative_pool = 1000;
    const auto c = cascade::train_cascade(data, params, 51);
    const auto mined = cascade::hard_negative_mine(c, data, 1, params, 51);
    CHECK(mined.dataset.negative_count() == data.negative_count());
    CHECK(mined.dataset.positive_count() == data.positive_count());
    CHECK(cascade::serialize_cascade(mined.cascade) == cascade::serialize_cascade(c));
}

TEST_CASE("hard_negative_mine: negative count is non-decreasing over rounds") {
    const auto& f = fixture();
    cascade::TrainParams params;
    const auto base = cascade::train_cascade(f.split.train, params, 99);
    const auto one = cascade::hard_negative_mine(base, f.split.train, 1, params, 99);
    const auto two = cascade::hard_negative_mine(base, f.split.train, 2, params, 99);
    CHECK(one.dataset.negative_count() >= f.split.train.negative_count());
    CHECK(two.dataset.negative_count() >= one.dataset.negative_count());
}

TEST_CASE("detect: rejects untrained cascade and undersized images") {
    CHECK_THROWS_AS(cascade::detect(RasterImage(200, 200, 0), Cascade{}), Error);
    const auto& f = fixture();
    CHECK_THROWS_AS(cascade::detect(RasterImage(50, 50, 0), f.cascade), Error);
}
