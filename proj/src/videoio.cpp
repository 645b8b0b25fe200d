#include "oneshot/videoio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace oneshot {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& file, const std::string& bytes) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + file.string());
}

fs::path frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%05d.ppm", index);
    return buf;
}

VideoSequence load_sequence(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());

    std::map<int, fs::path> indexed;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        int idx = -1;
        if (std::sscanf(name.c_str(), "frame_%5d.ppm", &idx) == 1 &&
            name == frame_filename(idx).string()) {
            indexed.emplace(idx, entry.path());
        }
    }
    if (indexed.empty()) throw MissingFrame(0);

    VideoSequence video;
    int expected = 0;
    for (const auto& [idx, path] : indexed) {
        if (idx != expected) throw MissingFrame(expected);
        Frame f;
        f.index = idx;
        try {
            f.image = decode_ppm(read_file(path));
        } catch (const MalformedPpm& e) {
            throw MalformedPpm(path.filename().string() + ": " + e.what());
        }
        if (!video.frames.empty() &&
            (f.image.width != video.width() || f.image.height != video.height())) {
            throw DimensionMismatch(path.filename().string() + ": expected " +
                                    std::to_string(video.width()) + "x" +
                                    std::to_string(video.height()) + ", got " +
                                    std::to_string(f.image.width) + "x" +
                                    std::to_string(f.image.height));
        }
        video.frames.push_back(std::move(f));
        ++expected;
    }
    return video;
}

void save_frame(const fs::path& dir, const Frame& frame) {
    write_file(dir / frame_filename(frame.index), encode_ppm(frame.image));
}

void save_sequence(const fs::path& dir, const VideoSequence& video) {
    fs::create_directories(dir);
    for (const Frame& f : video.frames) save_frame(dir, f);
}

// ---- annotations ----

std::vector<QueryAnnotation> parse_annotations(const std::string& json_text,
                                               std::optional<std::pair<int, int>> dims) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid annotation json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("query_points") || !doc["query_points"].is_array())
        throw ParseError("annotation json must contain a query_points array");
    const json& pts = doc["query_points"];
    if (pts.empty()) throw ParseError("no query points");

    std::vector<QueryAnnotation> out;
    for (const json& p : pts) {
        if (!p.is_object() || !p.contains("instance") || !p.contains("x") || !p.contains("y") ||
            !p["instance"].is_number_integer() || !p["x"].is_number() || !p["y"].is_number())
            throw ParseError("query point must be {instance, x, y}");
        QueryAnnotation a;
        a.instance_id = p["instance"].get<int>();
        a.point = {p["x"].get<double>(), p["y"].get<double>()};
        if (a.point.x < 0 || a.point.y < 0)
            throw OutOfBounds("query point (" + std::to_string(a.point.x) + ", " +
                              std::to_string(a.point.y) + ") has negative coordinates");
        if (dims && (a.point.x >= dims->first || a.point.y >= dims->second))
            throw OutOfBounds("query point (" + std::to_string(a.point.x) + ", " +
                              std::to_string(a.point.y) + ") outside frame " +
                              std::to_string(dims->first) + "x" + std::to_string(dims->second));
        out.push_back(a);
    }
    return out;
}

std::vector<QueryAnnotation> load_annotations(const fs::path& file,
                                              std::optional<std::pair<int, int>> dims) {
    return parse_annotations(read_file(file), dims);
}

void save_annotations(const fs::path& file, const std::vector<QueryAnnotation>& annos) {
    json pts = json::array();
    for (const QueryAnnotation& a : annos)
        pts.push_back({{"instance", a.instance_id}, {"x", a.point.x}, {"y", a.point.y}});
    write_file(file, json{{"query_points", pts}}.dump() + "\n");
}

// ---- JSONL record files ----

namespace {

json bbox_to_json(const BBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

BBox bbox_from_json(const json& j, int line) {
    if (!j.is_array() || j.size() != 4) throw ParseError("bbox must be [x0,y0,x1,y1]", line);
    for (const json& v : j)
        if (!v.is_number()) throw ParseError("bbox entries must be numbers", line);
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Parses one JSONL line, enforcing the exact key set (plate optional unless
// `plate_required`).
json parse_record_line(const std::string& line, int line_no,
                       const std::vector<std::string>& keys,
                       const std::vector<std::string>& optional_keys) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid json: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw ParseError("record must be a json object", line_no);
    for (const std::string& k : keys)
        if (!rec.contains(k)) throw ParseError("missing key \"" + k + "\"", line_no);
    for (const auto& [k, v] : rec.items()) {
        (void)v;
        if (std::find(keys.begin(), keys.end(), k) == keys.end() &&
            std::find(optional_keys.begin(), optional_keys.end(), k) == optional_keys.end())
            throw ParseError("unknown key \"" + k + "\"", line_no);
    }
    return rec;
}

template <typename Record, typename ParseFn>
std::vector<Record> load_jsonl(const fs::path& file, ParseFn parse_one) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<Record> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        out.push_back(parse_one(line, line_no));
    }
    return out;
}

int get_int(const json& rec, const char* key, int line) {
    if (!rec[key].is_number_integer()) throw ParseError(std::string(key) + " must be an integer", line);
    return rec[key].get<int>();
}

double get_num(const json& rec, const char* key, int line) {
    if (!rec[key].is_number()) throw ParseError(std::string(key) + " must be a number", line);
    return rec[key].get<double>();
}

std::string get_str(const json& rec, const char* key, int line) {
    if (!rec[key].is_string()) throw ParseError(std::string(key) + " must be a string", line);
    return rec[key].get<std::string>();
}

}  // namespace

void save_detections(const fs::path& file, const std::vector<Detection>& dets) {
    std::string out;
    for (const Detection& d : dets) {
        json rec{{"frame", d.frame_index},
                 {"instance", d.instance_id},
                 {"bbox", bbox_to_json(d.bbox)},
                 {"confidence", d.confidence}};
        if (d.plate) rec["plate"] = *d.plate;
        out += rec.dump() + "\n";
    }
    write_file(file, out);
}

std::vector<Detection> load_detections(const fs::path& file) {
    return load_jsonl<Detection>(file, [](const std::string& line, int line_no) {
        const json rec = parse_record_line(line, line_no,
                                           {"frame", "instance", "bbox", "confidence"}, {"plate"});
        Detection d;
        d.frame_index = get_int(rec, "frame", line_no);
        d.instance_id = get_int(rec, "instance", line_no);
        d.bbox = bbox_from_json(rec["bbox"], line_no);
        d.confidence = get_num(rec, "confidence", line_no);
        if (rec.contains("plate")) d.plate = get_str(rec, "plate", line_no);
        return d;
    });
}

void save_ground_truth(const fs::path& file, const std::vector<GroundTruthRecord>& gts) {
    std::string out;
    for (const GroundTruthRecord& g : gts) {
        json rec{{"frame", g.frame_index},
                 {"instance", g.instance_id},
                 {"bbox", bbox_to_json(g.bbox)},
                 {"plate", g.plate}};
        out += rec.dump() + "\n";
    }
    write_file(file, out);
}

std::vector<GroundTruthRecord> load_ground_truth(const fs::path& file) {
    return load_jsonl<GroundTruthRecord>(file, [](const std::string& line, int line_no) {
        const json rec =
            parse_record_line(line, line_no, {"frame", "instance", "bbox", "plate"}, {});
        GroundTruthRecord g;
        g.frame_index = get_int(rec, "frame", line_no);
        g.instance_id = get_int(rec, "instance", line_no);
        g.bbox = bbox_from_json(rec["bbox"], line_no);
        g.plate = get_str(rec, "plate", line_no);
        if (g.plate.empty()) throw ParseError("ground-truth plate must be non-empty", line_no);
        if (!g.bbox.well_formed()) throw ParseError("ground-truth bbox is degenerate", line_no);
        return g;
    });
}

void save_recognitions(const fs::path& file, const std::vector<RecognitionRecord>& recs) {
    std::string out;
    for (const RecognitionRecord& r : recs) {
        json rec{{"frame", r.frame_index},
                 {"instance", r.instance_id},
                 {"caption", r.caption},
                 {"prompt", r.prompt}};
        if (r.plate) rec["plate"] = *r.plate;
        out += rec.dump() + "\n";
    }
    write_file(file, out);
}

std::vector<RecognitionRecord> load_recognitions(const fs::path& file) {
    return load_jsonl<RecognitionRecord>(file, [](const std::string& line, int line_no) {
        const json rec = parse_record_line(line, line_no,
                                           {"frame", "instance", "caption", "prompt"}, {"plate"});
        RecognitionRecord r;
        r.frame_index = get_int(rec, "frame", line_no);
        r.instance_id = get_int(rec, "instance", line_no);
        r.caption = get_str(rec, "caption", line_no);
        r.prompt = get_str(rec, "prompt", line_no);
        if (rec.contains("plate")) r.plate = get_str(rec, "plate", line_no);
        return r;
    });
}

void save_plates(const fs::path& file, const std::vector<InstancePlate>& plates) {
    json doc = json::object();
    for (const InstancePlate& p : plates)
        if (p.plate) doc[std::to_string(p.instance_id)] = *p.plate;
    write_file(file, doc.dump() + "\n");
}

std::vector<InstancePlate> load_plates(const fs::path& file) {
    json doc;
    try {
        doc = json::parse(read_file(file));
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid plates json: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("plates file must be a json object");
    std::vector<InstancePlate> out;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_string()) throw ParseError("plate for instance " + key + " must be a string");
        try {
            out.push_back({std::stoi(key), value.get<std::string>()});
        } catch (const std::exception&) {
            throw ParseError("instance key \"" + key + "\" is not an integer");
        }
    }
    std::sort(out.begin(), out.end(),
              [](const InstancePlate& a, const InstancePlate& b) { return a.instance_id < b.instance_id; });
    return out;
}

void save_mask(const fs::path& file, const Mask& mask) { write_file(file, encode_pgm(mask)); }

Mask load_mask(const fs::path& file) { return decode_pgm(read_file(file)); }

}  // namespace oneshot
