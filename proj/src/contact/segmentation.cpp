#include <algorithm>
#include <cmath>
#include <random>

#include "hoi/contact/contact.hpp"
#include "json.hpp"

namespace hoi::contact {

namespace {

bool fg(const render::Mask& m, int x, int y)
{
    return x >= 0 && y >= 0 && x < m.width && y < m.height && m.at(x, y) >= 0.5;
}

}  // namespace

std::vector<std::pair<int, int>> contour_pixels(const render::Mask& m)
{
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!fg(m, x, y)) continue;
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy)
                for (int dx = -1; dx <= 1 && !edge; ++dx)
                    if ((dx || dy) && !fg(m, x + dx, y + dy)) edge = true;
            if (edge) out.emplace_back(x, y);
        }
    return out;
}

std::vector<int> contour_filter(const render::Mask& hand, const std::vector<render::Mask>& objects,
                                double adjacency_px)
{
    if (!(adjacency_px >= 0.0)) throw InputError("contour_filter: adjacency must be >= 0");
    const auto hand_contour = contour_pixels(hand);
    if (hand_contour.empty()) throw InputError("contour_filter: hand mask is empty");
    std::vector<char> on_contour(hand.size(), 0);
    for (auto [x, y] : hand_contour) on_contour[static_cast<std::size_t>(y) * hand.width + x] = 1;
    const int r = static_cast<int>(std::floor(adjacency_px));
    const double r2 = adjacency_px * adjacency_px;

    std::vector<int> kept;
    for (std::size_t k = 0; k < objects.size(); ++k) {
        const render::Mask& obj = objects[k];
        if (!obj.same_size(hand))
            throw InputError("contour_filter: object mask " + std::to_string(k) + " is " + std::to_string(obj.width) +
                             "x" + std::to_string(obj.height) + ", hand mask is " + std::to_string(hand.width) + "x" +
                             std::to_string(hand.height));
        bool near = false;
        for (auto [x, y] : contour_pixels(obj)) {
            for (int dy = -r; dy <= r && !near; ++dy)
                for (int dx = -r; dx <= r && !near; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (dx * dx + dy * dy > r2 || xx < 0 || yy < 0 || xx >= hand.width || yy >= hand.height) continue;
                    near = on_contour[static_cast<std::size_t>(yy) * hand.width + xx] != 0;
                }
            if (near) break;
        }
        if (near) kept.push_back(static_cast<int>(k));
    }
    return kept;
}

std::vector<int> label_components(const render::Mask& m, int* count)
{
    std::vector<int> label(m.size(), -1);
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!fg(m, x, y) || label[static_cast<std::size_t>(y) * m.width + x] >= 0) continue;
            stack.emplace_back(x, y);
            label[static_cast<std::size_t>(y) * m.width + x] = next;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = cx + dx, yy = cy + dy;
                        if (!fg(m, xx, yy)) continue;
                        int& l = label[static_cast<std::size_t>(yy) * m.width + xx];
                        if (l < 0) {
                            l = next;
                            stack.emplace_back(xx, yy);
                        }
                    }
            }
            ++next;
        }
    if (count) *count = next;
    return label;
}

SegPrompts make_seg_prompts(const render::Mask& occluded, int samples_per_component, int bbox_margin,
                            std::uint64_t seed)
{
    if (samples_per_component < 1) throw InputError("make_seg_prompts: samples_per_component must be >= 1");
    if (bbox_margin < 0) throw InputError("make_seg_prompts: bbox_margin must be >= 0");
    int count = 0;
    const std::vector<int> label = label_components(occluded, &count);
    if (count == 0) throw InputError("make_seg_prompts: mask is empty");

    std::vector<std::vector<int>> members(count);
    for (std::size_t i = 0; i < label.size(); ++i)
        if (label[i] >= 0) members[label[i]].push_back(static_cast<int>(i));

    SegPrompts out;
    out.x0 = occluded.width;
    out.y0 = occluded.height;
    out.x1 = -1;
    out.y1 = -1;
    std::mt19937_64 rng(seed);
    for (const auto& comp : members) {
        std::uniform_int_distribution<std::size_t> pick(0, comp.size() - 1);
        for (int s = 0; s < samples_per_component; ++s) {
            const int i = comp[pick(rng)];
            out.points.emplace_back(i % occluded.width + 0.5, i / occluded.width + 0.5);
        }
        for (int i : comp) {
            const int x = i % occluded.width, y = i / occluded.width;
            out.x0 = std::min(out.x0, x);
            out.y0 = std::min(out.y0, y);
            out.x1 = std::max(out.x1, x);
            out.y1 = std::max(out.y1, y);
        }
    }
    out.x0 = std::max(0, out.x0 - bbox_margin);
    out.y0 = std::max(0, out.y0 - bbox_margin);
    out.x1 = std::min(occluded.width - 1, out.x1 + bbox_margin);
    out.y1 = std::min(occluded.height - 1, out.y1 + bbox_margin);
    return out;
}

std::string format_seg_prompts(const SegPrompts& p)
{
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const Vec2& q : p.points) j["points"].push_back({q.x(), q.y()});
    j["bbox"] = {p.x0, p.y0, p.x1, p.y1};
    return j.dump(2) + "\n";
}

}  // namespace hoi::contact
