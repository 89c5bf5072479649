#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "detkit/augment.hpp"

namespace detkit {

// Flat run configuration. Every field has a default; a config file only needs
// the keys it wants to override, and unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;

    // augmentation
    std::array<double, 2> scale_range{0.8, 1.2};
    std::array<double, 2> rotation_deg{-15.0, 15.0};
    std::array<double, 2> mixup_range{0.2, 0.4};
    int target_size = 640;
    std::array<double, 2> noise_sigma{0.01, 0.05};
    std::array<double, 2> brightness_range{0.6, 1.4};
    std::array<double, 2> contrast_range{0.6, 1.4};
    std::array<double, 2> saturation_range{0.6, 1.4};
    double min_visible_frac = 0.25;
    double pad_value = 114.0 / 255.0;
    double center_jitter = 0.25;
    bool photometric_per_tile = true;

    // anchors
    int anchor_k = 9;
    int anchor_max_iter = 300;
    int anchor_image_size = 640;

    // evaluation
    double eval_iou_thresh = 0.5;
    double eval_conf_thresh = 0.25;

    // training-recipe metadata, carried through manifests only
    double learning_rate = 0.0005;
    int batch_size = 32;
    double momentum = 0.9;
    double weight_decay = 0.0001;

    // paths (normally supplied by CLI flags)
    std::string input_dir;
    std::string output_dir;

    AugmentConfig augment() const {
        AugmentConfig a;
        a.scale_range = scale_range;
        a.rotation_deg = rotation_deg;
        a.mixup_range = mixup_range;
        a.target_size = target_size;
        a.noise_sigma = noise_sigma;
        a.brightness_range = brightness_range;
        a.contrast_range = contrast_range;
        a.saturation_range = saturation_range;
        a.min_visible_frac = min_visible_frac;
        a.pad_value = pad_value;
        a.center_jitter = center_jitter;
        a.photometric_per_tile = photometric_per_tile;
        a.seed = seed;
        return a;
    }
};

namespace detail {
inline std::array<double, 2> range_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("config: " + key + " must be a [low, high] pair");
    std::array<double, 2> r{j[0].get<double>(), j[1].get<double>()};
    if (r[0] > r[1]) throw std::invalid_argument("config: " + key + " has low > high");
    return r;
}
}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
    return nlohmann::json{{"seed", c.seed},
                          {"scale_range", c.scale_range},
                          {"rotation_deg", c.rotation_deg},
                          {"mixup_range", c.mixup_range},
                          {"target_size", c.target_size},
                          {"noise_sigma", c.noise_sigma},
                          {"brightness_range", c.brightness_range},
                          {"contrast_range", c.contrast_range},
                          {"saturation_range", c.saturation_range},
                          {"min_visible_frac", c.min_visible_frac},
                          {"pad_value", c.pad_value},
                          {"center_jitter", c.center_jitter},
                          {"photometric_per_tile", c.photometric_per_tile},
                          {"anchor_k", c.anchor_k},
                          {"anchor_max_iter", c.anchor_max_iter},
                          {"anchor_image_size", c.anchor_image_size},
                          {"eval_iou_thresh", c.eval_iou_thresh},
                          {"eval_conf_thresh", c.eval_conf_thresh},
                          {"learning_rate", c.learning_rate},
                          {"batch_size", c.batch_size},
                          {"momentum", c.momentum},
                          {"weight_decay", c.weight_decay},
                          {"input_dir", c.input_dir},
                          {"output_dir", c.output_dir}};
}

// Strict parse: every key must be known.
inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    for (const auto& [key, val] : j.items()) {
        if (key == "seed") c.seed = val.get<std::uint64_t>();
        else if (key == "scale_range") c.scale_range = detail::range_from_json(val, key);
        else if (key == "rotation_deg") c.rotation_deg = detail::range_from_json(val, key);
        else if (key == "mixup_range") c.mixup_range = detail::range_from_json(val, key);
        else if (key == "target_size") c.target_size = val.get<int>();
        else if (key == "noise_sigma") c.noise_sigma = detail::range_from_json(val, key);
        else if (key == "brightness_range") c.brightness_range = detail::range_from_json(val, key);
        else if (key == "contrast_range") c.contrast_range = detail::range_from_json(val, key);
        else if (key == "saturation_range") c.saturation_range = detail::range_from_json(val, key);
        else if (key == "min_visible_frac") c.min_visible_frac = val.get<double>();
        else if (key == "pad_value") c.pad_value = val.get<double>();
        else if (key == "center_jitter") c.center_jitter = val.get<double>();
        else if (key == "photometric_per_tile") c.photometric_per_tile = val.get<bool>();
        else if (key == "anchor_k") c.anchor_k = val.get<int>();
        else if (key == "anchor_max_iter") c.anchor_max_iter = val.get<int>();
        else if (key == "anchor_image_size") c.anchor_image_size = val.get<int>();
        else if (key == "eval_iou_thresh") c.eval_iou_thresh = val.get<double>();
        else if (key == "eval_conf_thresh") c.eval_conf_thresh = val.get<double>();
        else if (key == "learning_rate") c.learning_rate = val.get<double>();
        else if (key == "batch_size") c.batch_size = val.get<int>();
        else if (key == "momentum") c.momentum = val.get<double>();
        else if (key == "weight_decay") c.weight_decay = val.get<double>();
        else if (key == "input_dir") c.input_dir = val.get<std::string>();
        else if (key == "output_dir") c.output_dir = val.get<std::string>();
        else throw std::invalid_argument("config: unknown key \"" + key + "\"");
    }
    if (c.target_size <= 0) throw std::invalid_argument("config: target_size must be positive");
    if (!(c.min_visible_frac > 0.0 && c.min_visible_frac <= 1.0))
        throw std::invalid_argument("config: min_visible_frac must lie in (0,1]");
    if (c.pad_value < 0.0 || c.pad_value > 1.0)
        throw std::invalid_argument("config: pad_value must lie in [0,1]");
    return c;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// FNV-1a over the canonical JSON dump; stable across runs and platforms.
inline std::string config_hash(const RunConfig& c) {
    const std::string dump = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace detkit
