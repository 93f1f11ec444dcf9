#include <doctest.h>

#include <sstream>

#include "upw/error.hpp"
#include "upw/image.hpp"

using namespace upw;

TEST_CASE("ppm round trip") {
    RgbImage img(3, 2);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 13);
    std::stringstream ss;
    write_ppm(ss, img);
    CHECK(ss.str().rfind("P6\n3 2\n255\n", 0) == 0);
    CHECK(read_ppm(ss) == img);
}

TEST_CASE("ppm variants") {
    std::istringstream gray(std::string("P5\n# note\n2 1\n255\n") + char(10) + char(200));
    const RgbImage g = read_ppm(gray);
    CHECK(g.at(0, 0) == Rgb{10, 10, 10});
    CHECK(g.at(1, 0) == Rgb{200, 200, 200});

    std::istringstream low(std::string("P6 1 1 15 ") + char(15) + char(0) + char(7));
    CHECK(read_ppm(low).at(0, 0) == Rgb{255, 0, 119});
}

TEST_CASE("ppm errors") {
    auto kind = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_ppm(in);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    CHECK(kind("P3\n1 1\n255\n0 0 0") == ErrorKind::Format);
    CHECK(kind("P6\n0 4\n255\n") == ErrorKind::EmptyImage);
    CHECK(kind("P6\n2 2\n255\nabc") == ErrorKind::Truncation);
}
