#include "hoi/render/mask.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace hoi::render {

double Mask::sum() const
{
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

void validate(const Mask& m, const std::string& name)
{
    if (m.width <= 0 || m.height <= 0) throw InputError(name + ": empty mask");
    if (m.values.size() != static_cast<std::size_t>(m.width) * m.height)
        throw InputError(name + ": value count does not match " + std::to_string(m.width) + "x" +
                         std::to_string(m.height));
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (!(m.values[i] >= 0.0 && m.values[i] <= 1.0))
            throw InputError(name + ": value at pixel " + std::to_string(i) + " outside [0,1]");
}

Mask binarized(const Mask& m, double threshold)
{
    Mask out(m.width, m.height);
    for (std::size_t i = 0; i < m.size(); ++i) out.values[i] = m.values[i] >= threshold ? 1.0 : 0.0;
    return out;
}

namespace {

// Row-sparse area-overlap weights mapping n input cells onto m output cells.
std::vector<std::vector<std::pair<int, double>>> area_weights(int n, int m)
{
    std::vector<std::vector<std::pair<int, double>>> w(m);
    const double scale = static_cast<double>(n) / m;
    for (int o = 0; o < m; ++o) {
        const double lo = o * scale, hi = (o + 1) * scale;
        for (int i = static_cast<int>(std::floor(lo)); i < std::min(n, static_cast<int>(std::ceil(hi))); ++i) {
            const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
            if (overlap > 0.0) w[o].emplace_back(i, overlap / scale);
        }
    }
    return w;
}

}  // namespace

Mask resampled(const Mask& m, int width, int height)
{
    if (width <= 0 || height <= 0) throw InputError("resampled: size must be positive");
    if (width == m.width && height == m.height) return m;
    const auto wx = area_weights(m.width, width);
    const auto wy = area_weights(m.height, height);
    Mask rows(width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (const auto& [i, w] : wx[x]) acc += w * m.at(i, y);
            rows.at(x, y) = acc;
        }
    Mask out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (const auto& [j, w] : wy[y]) acc += w * rows.at(x, j);
            out.at(x, y) = std::clamp(acc, 0.0, 1.0);
        }
    return out;
}

Mask clamp_difference(const Mask& a, const Mask& b)
{
    if (!a.same_size(b)) throw InputError("clamp_difference: size mismatch");
    Mask out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = std::clamp(a.values[i] - b.values[i], 0.0, 1.0);
    return out;
}

double hard_iou(const Mask& a, const Mask& b)
{
    if (!a.same_size(b)) throw InputError("hard_iou: size mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a.values[i] >= 0.5, y = b.values[i] >= 0.5;
        inter += x && y;
        uni += x || y;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

Mask parse_pgm(const std::string& bytes, const std::string& name)
{
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw InputError(name + ": truncated PGM");
        return bytes.substr(start, pos - start);
    };
    const std::string magic = token();
    if (magic != "P2" && magic != "P5") throw InputError(name + ": not a PGM (P2/P5) file");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::logic_error&) {
        throw InputError(name + ": bad PGM header");
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw InputError(name + ": bad PGM header");
    Mask m(w, h);
    if (magic == "P2") {
        for (auto& v : m.values) {
            int x = 0;
            try {
                x = std::stoi(token());
            } catch (const std::logic_error&) {
                throw InputError(name + ": bad PGM sample");
            }
            if (x < 0 || x > maxval) throw InputError(name + ": PGM sample out of range");
            v = static_cast<double>(x) / maxval;
        }
    } else {
        ++pos;  // single whitespace after maxval
        const int bpp = maxval < 256 ? 1 : 2;
        if (bytes.size() < pos + m.size() * bpp) throw InputError(name + ": truncated PGM data");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
            const int x = bpp == 1 ? p[0] : (p[0] << 8) | p[1];
            m.values[i] = std::min(1.0, static_cast<double>(x) / maxval);
        }
    }
    return m;
}

Mask load_mask(const std::string& path)
{
    const std::string bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) return parse_pgm(bytes, path);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw InputError(path + ": not a readable PNG or PGM (" + image.message + ")");
    image.format = PNG_FORMAT_GRAY;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw InputError(path + ": PNG decode failed (" + image.message + ")");
    }
    Mask m(static_cast<int>(image.width), static_cast<int>(image.height));
    for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = buf[i] / 255.0;
    return m;
}

namespace {

std::vector<unsigned char> to_bytes(const Mask& m)
{
    std::vector<unsigned char> buf(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        buf[i] = static_cast<unsigned char>(std::lround(std::clamp(m.values[i], 0.0, 1.0) * 255.0));
    return buf;
}

}  // namespace

void save_png(const std::string& path, const Mask& m)
{
    const auto buf = to_bytes(m);
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(m.width);
    image.height = static_cast<png_uint_32>(m.height);
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, buf.data(), 0, nullptr))
        throw RuntimeFailure(path + ": PNG encode failed");
    std::string out(size, '\0');
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, buf.data(), 0, nullptr))
        throw RuntimeFailure(path + ": PNG encode failed");
    out.resize(size);
    write_file_atomic(path, out);
}

void save_pgm(const std::string& path, const Mask& m)
{
    const auto buf = to_bytes(m);
    std::string out = "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(buf.data()), buf.size());
    write_file_atomic(path, out);
}

std::string png_library_version()
{
    return png_get_libpng_ver(nullptr);
}

}  // namespace hoi::render
