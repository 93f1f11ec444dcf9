#include "upw/image.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "upw/error.hpp"

namespace upw {
namespace {

void skip_space_and_comments(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

std::size_t read_header_number(std::istream& in, const char* what) {
    skip_space_and_comments(in);
    std::size_t value = 0;
    bool any = false;
    while (std::isdigit(in.peek())) {
        value = value * 10 + static_cast<std::size_t>(in.get() - '0');
        any = true;
        if (value > (std::size_t{1} << 31)) throw Error(ErrorKind::Format, std::string("ppm: ") + what + " too large");
    }
    if (!any) throw Error(ErrorKind::Format, std::string("ppm: missing ") + what);
    return value;
}

}  // namespace

RgbImage read_ppm(std::istream& in) {
    char magic[2] = {};
    if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '6' && magic[1] != '5')) {
        throw Error(ErrorKind::Format, "ppm: expected P6 or P5 magic");
    }
    const bool gray = magic[1] == '5';
    const std::size_t width = read_header_number(in, "width");
    const std::size_t height = read_header_number(in, "height");
    const std::size_t maxval = read_header_number(in, "maxval");
    if (maxval == 0 || maxval > 255) throw Error(ErrorKind::Format, "ppm: only 8-bit maxval (1..255) is supported");
    if (!std::isspace(in.get())) throw Error(ErrorKind::Format, "ppm: malformed header");
    if (width == 0 || height == 0) throw Error(ErrorKind::EmptyImage, "ppm: zero-dimension image");

    const std::size_t channels = gray ? 1 : 3;
    std::vector<std::uint8_t> raw(width * height * channels);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw Error(ErrorKind::Truncation, "ppm: pixel data shorter than header dimensions");
    }
    if (maxval != 255) {
        for (auto& v : raw) v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    }

    RgbImage image(width, height);
    if (gray) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            image.pixels[3 * i] = image.pixels[3 * i + 1] = image.pixels[3 * i + 2] = raw[i];
        }
    } else {
        image.pixels = std::move(raw);
    }
    return image;
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return read_ppm(in);
}

void write_ppm(std::ostream& out, const RgbImage& image) {
    if (image.empty()) throw Error(ErrorKind::EmptyImage, "ppm: refusing to write empty image");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    write_ppm(out, image);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace upw
