#include "doctest.h"
#include "hoi/io/scene_io.hpp"

using namespace hoi;

TEST_CASE("bundled demo scene reaches the end-to-end thresholds")
{
    const io::LoadedScene ls = io::load_scene(HOI_DATA_DIR "/demo_wrap");
    const pipeline::RunReport r = pipeline::run(ls.scene, ls.config, pipeline::StageSet::All, false);
    CHECK(r.stage1.status != "failed");
    CHECK(r.stage2.status != "failed");
    CHECK(r.stage3.status != "failed");
    CHECK(r.metrics.object_iou >= 0.85);
    CHECK(r.metrics.hand_iou >= 0.85);
    CHECK(r.metrics.intersection_volume <= 2.0);
}
