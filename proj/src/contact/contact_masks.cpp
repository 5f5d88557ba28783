#include <algorithm>

#include "hoi/contact/contact.hpp"

namespace hoi::contact {

namespace {

render::Mask filter3(const render::Mask& m, bool take_min)
{
    render::Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            double v = m.at(x, y);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height) continue;
                    v = take_min ? std::min(v, m.at(xx, yy)) : std::max(v, m.at(xx, yy));
                }
            out.at(x, y) = v;
        }
    return out;
}

void require_size(const render::Mask& ref, const render::Mask& m, const char* name)
{
    if (!m.same_size(ref))
        throw InputError(std::string("derive_contact_masks: ") + name + " is " + std::to_string(m.width) + "x" +
                         std::to_string(m.height) + ", expected " + std::to_string(ref.width) + "x" +
                         std::to_string(ref.height));
}

}  // namespace

render::Mask opened(const render::Mask& m)
{
    return filter3(filter3(m, true), false);
}

ContactMasks derive_contact_masks(const render::Mask& object, const render::Mask& inpainted_object,
                                  const render::Mask& hand, const render::Mask& complete_hand)
{
    require_size(object, inpainted_object, "inpainted object mask");
    require_size(object, hand, "hand mask");
    require_size(object, complete_hand, "complete hand mask");
    ContactMasks out;
    out.front = opened(render::clamp_difference(inpainted_object, object));
    out.back = opened(render::clamp_difference(complete_hand, hand));
    return out;
}

}  // namespace hoi::contact
