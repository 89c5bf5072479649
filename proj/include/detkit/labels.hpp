#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "detkit/box.hpp"

namespace detkit {

// One line of a YOLO-style label file, converted to absolute corner form.
struct LabelRecord {
    int class_id = 0;
    BBox box;
    double score = -1.0;  // < 0 when the file carries no confidence column
};

struct LabelParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses "class_id cx cy w h [score]" lines with coordinates normalized to
// [0,1]. Corners are clipped to the image bounds.
inline std::vector<LabelRecord> parse_label_file(const std::string& text, double image_w,
                                                 double image_h, bool expect_scores) {
    if (!(image_w > 0.0) || !(image_h > 0.0))
        throw std::invalid_argument("parse_label_file: image dimensions must be positive");
    std::vector<LabelRecord> out;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        long cls;
        double cx, cy, w, h;
        if (!(ls >> cls >> cx >> cy >> w >> h))
            throw LabelParseError("line " + std::to_string(line_no) + ": malformed record");
        double score = -1.0;
        if (expect_scores) {
            if (!(ls >> score))
                throw LabelParseError("line " + std::to_string(line_no) + ": missing score column");
            if (score < 0.0 || score > 1.0)
                throw LabelParseError("line " + std::to_string(line_no) + ": score out of [0,1]");
        }
        std::string trailing;
        if (ls >> trailing)
            throw LabelParseError("line " + std::to_string(line_no) + ": unexpected trailing field");
        if (cls < 0)
            throw LabelParseError("line " + std::to_string(line_no) + ": negative class id");
        for (double v : {cx, cy, w, h})
            if (!(v >= 0.0 && v <= 1.0))
                throw LabelParseError("line " + std::to_string(line_no) +
                                      ": coordinate out of [0,1]");
        LabelRecord rec;
        rec.class_id = static_cast<int>(cls);
        rec.score = score;
        rec.box.x1 = std::clamp((cx - w / 2.0) * image_w, 0.0, image_w);
        rec.box.y1 = std::clamp((cy - h / 2.0) * image_h, 0.0, image_h);
        rec.box.x2 = std::clamp((cx + w / 2.0) * image_w, 0.0, image_w);
        rec.box.y2 = std::clamp((cy + h / 2.0) * image_h, 0.0, image_h);
        out.push_back(rec);
    }
    return out;
}

// Inverse of parsing, fixed 6-decimal formatting. Boxes must be inside the
// image.
inline std::string serialize_label_file(const std::vector<LabelRecord>& records, double image_w,
                                        double image_h) {
    std::string out;
    char buf[160];
    for (const LabelRecord& r : records) {
        if (r.box.x1 < 0.0 || r.box.y1 < 0.0 || r.box.x2 > image_w || r.box.y2 > image_h ||
            r.box.x2 < r.box.x1 || r.box.y2 < r.box.y1)
            throw std::invalid_argument("serialize_label_file: box outside image bounds");
        const double cx = r.box.cx() / image_w, cy = r.box.cy() / image_h;
        const double w = r.box.width() / image_w, h = r.box.height() / image_h;
        if (r.score >= 0.0)
            std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f\n", r.class_id, cx, cy, w, h,
                          r.score);
        else
            std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", r.class_id, cx, cy, w, h);
        out += buf;
    }
    return out;
}

// All .txt label files of a directory, keyed by stem. Coordinates stay in
// normalized space (image_w = image_h = 1).
inline std::vector<std::pair<std::string, std::vector<LabelRecord>>> load_label_dir(
    const std::filesystem::path& dir, bool expect_scores) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw std::runtime_error("label directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<std::pair<std::string, std::vector<LabelRecord>>> out;
    for (const fs::path& f : files) {
        std::ifstream in(f);
        if (!in) throw std::runtime_error("cannot read label file: " + f.string());
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            out.emplace_back(f.stem().string(), parse_label_file(ss.str(), 1.0, 1.0, expect_scores));
        } catch (const LabelParseError& e) {
            throw LabelParseError(f.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace detkit
