#pragma once

// Shared test fixture: one trained-and-mined wrench detector, built lazily and
// reused by every suite in the binary.

#include "panelbot/training_data.hpp"

namespace testfix {

struct TrainedFixture {
    panelbot::cascade::Dataset data;
    panelbot::cascade::SplitDataset split;
    panelbot::cascade::Cascade cascade;
};

inline const TrainedFixture& trained_wrench_detector() {
    static TrainedFixture f = [] {
        using namespace panelbot;
        TrainedFixture t;
        cascade::DatasetParams dp;
        dp.scenes = 24;
        t.data = cascade::build_dataset(dp, 515);
        t.split = cascade::split_dataset(t.data, 0.7, 600, 3);
        const cascade::Cascade base = cascade::train_cascade(t.split.train, {}, 77);
        t.cascade = cascade::hard_negative_mine(base, t.split.train, 1, {}, 77).cascade;
        return t;
    }();
    return f;
}

}  // namespace testfix
