#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "flickermine/errors.hpp"
#include "flickermine/frame_store.hpp"
#include "flickermine/image_io.hpp"

using namespace flickermine;

namespace {

void write_frame(const std::filesystem::path& dir, std::int64_t index, int w, int h, std::uint8_t base) {
    std::vector<std::uint8_t> levels(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<std::uint8_t>(base + i);
    write_gray_png(dir / frame_file_name(index), w, h, levels);
}

}  // namespace

TEST(FrameStore, FileNamesAreZeroPadded) {
    EXPECT_EQ(frame_file_name(0), "00000000.png");
    EXPECT_EQ(frame_file_name(1234, "jpg"), "00001234.jpg");
}

TEST(FrameStore, ScansVideosAndServesFrames) {
    fixtures::TempDir dir;
    for (int i = 0; i < 3; ++i) write_frame(dir.path() / "v1", i, 4, 3, static_cast<std::uint8_t>(10 * i));
    write_frame(dir.path() / "v2", 0, 5, 5, 0);
    std::ofstream(dir.path() / "v1" / "notes.txt") << "ignored";

    DirectoryFrameStore store(dir.path(), 2);
    EXPECT_EQ(store.videos(), (std::vector<std::string>{"v1", "v2"}));
    EXPECT_EQ(store.frame_count("v1"), 3);
    const auto f1 = store.get("v1", 1);
    EXPECT_EQ(f1->width(), 4);
    EXPECT_EQ(f1->at(0, 0), 10 / 255.0);
    EXPECT_EQ(store.get("v1", 1), f1);
    for (int i = 0; i < 3; ++i) store.get("v1", i);
    EXPECT_EQ(*store.get("v1", 1), *f1);
    EXPECT_EQ(store.info("v2", 0).relative_path, "v2/00000000.png");
    EXPECT_EQ(store.info("v2", 0).width, 5);
    EXPECT_EQ(store.color("v1", 2).data.size(), 4u * 3 * 3);
}

TEST(FrameStore, ErrorsNameWhatIsMissing) {
    fixtures::TempDir dir;
    try {
        DirectoryFrameStore store(dir.path() / "absent");
        FAIL();
    } catch (const FrameAccessError& e) {
        EXPECT_NE(std::string(e.what()).find("absent"), std::string::npos);
    }
    write_frame(dir.path() / "v", 0, 4, 4, 0);
    write_frame(dir.path() / "v", 2, 4, 4, 0);
    write_frame(dir.path() / "v", 3, 5, 4, 0);
    DirectoryFrameStore store(dir.path());
    EXPECT_EQ(store.frame_count("v"), 4);
    EXPECT_THROW(store.frame_count("w"), FrameAccessError);
    EXPECT_THROW(store.get("v", 4), FrameAccessError);
    EXPECT_THROW(store.get("v", -1), FrameAccessError);
    try {
        store.get("v", 1);
        FAIL();
    } catch (const FrameAccessError& e) {
        EXPECT_NE(std::string(e.what()).find("00000001"), std::string::npos);
    }
    store.get("v", 0);
    EXPECT_THROW(store.get("v", 3), FrameAccessError);
}

TEST(FrameStore, MemoryStore) {
    MemoryFrameStore store;
    store.add_video("m", {fixtures::noise_image(6, 4, 1), fixtures::noise_image(6, 4, 2)});
    EXPECT_EQ(store.frame_count("m"), 2);
    EXPECT_EQ(*store.get("m", 1), fixtures::noise_image(6, 4, 2));
    EXPECT_THROW(store.get("m", 2), FrameAccessError);
    EXPECT_THROW(store.frame_count("x"), FrameAccessError);
    EXPECT_THROW(store.add_video("bad", {fixtures::noise_image(6, 4, 1), fixtures::noise_image(5, 4, 2)}), ImageError);
    EXPECT_EQ(store.color("m", 0).width, 6);
}
