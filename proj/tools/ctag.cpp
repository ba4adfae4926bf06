// ctag: command-line front end for the CylinderTag toolkit.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cylindertag/config.hpp"
#include "cylindertag/detector.hpp"
#include "cylindertag/generator.hpp"
#include "cylindertag/metrics.hpp"
#include "cylindertag/pose.hpp"

using namespace cylindertag;

namespace {

struct ImageDetections {
    std::string image;
    std::vector<MarkerDetection> markers;
};

void save_detections(const std::vector<ImageDetections>& all, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "cylindertag-detections v1\n";
    char buf[64];
    for (const auto& img : all) {
        os << "image " << img.image << "\n";
        for (const auto& m : img.markers) {
            os << "marker " << m.id << " "
               << (m.direction == ReadDirection::Forward ? 'F' : 'R') << " "
               << m.columns.size() << "\n";
            for (const auto& col : m.columns) {
                os << "col " << col.column;
                for (const auto& c : col.corners) {
                    std::snprintf(buf, sizeof(buf), " %.4f %.4f", c.x(), c.y());
                    os << buf;
                }
                os << "\n";
            }
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<ImageDetections> load_detections(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "cylindertag-detections v1")
        throw std::runtime_error("bad detections header: " + path);
    std::vector<ImageDetections> all;
    MarkerDetection* cur_marker = nullptr;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "image") {
            ImageDetections d;
            ls >> d.image;
            all.push_back(std::move(d));
            cur_marker = nullptr;
        } else if (tag == "marker") {
            if (all.empty()) throw std::runtime_error("marker before image: " + path);
            MarkerDetection m;
            char dir;
            size_t ncols;
            ls >> m.id >> dir >> ncols;
            m.direction = dir == 'F' ? ReadDirection::Forward : ReadDirection::Reverse;
            all.back().markers.push_back(std::move(m));
            cur_marker = &all.back().markers.back();
        } else if (tag == "col") {
            if (!cur_marker) throw std::runtime_error("col before marker: " + path);
            DecodedColumn col;
            ls >> col.column;
            for (auto& c : col.corners) ls >> c.x() >> c.y();
            if (!ls) throw std::runtime_error("bad col line: " + line);
            cur_marker->columns.push_back(col);
        } else {
            throw std::runtime_error("bad detections line: " + line);
        }
    }
    return all;
}

/// Accept either a full object model or a single-marker corner model.
ObjectModel load_any_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string magic;
    is >> magic;
    is.close();
    if (magic == "cylindertag-objmodel") return ObjectModel::load(path);
    CornerModel cm = CornerModel::load(path);
    ObjectModel om;
    om.provenance = ModelProvenance::Ideal;
    for (const auto& [key, p] : cm.points) om.points[{cm.marker_id, key.first, key.second}] = p;
    return om;
}

RigidTransform parse_pose_line(std::istream& is) {
    double qw, qx, qy, qz, tx, ty, tz;
    if (!(is >> qw >> qx >> qy >> qz >> tx >> ty >> tz))
        throw std::runtime_error("expected: qw qx qy qz tx ty tz");
    RigidTransform T;
    T.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    T.translation = Vec3(tx, ty, tz);
    return T;
}

MarkerLayout layout_from_dict(const Dictionary& dict, int id, double height, double radius,
                              const LayoutParams& lp = {}) {
    for (const auto& m : dict.markers())
        if (m.id == id) return layout_marker(m, height, radius, lp);
    throw std::runtime_error("marker id " + std::to_string(id) + " not in dictionary");
}

RigidTransform scene_pose(double yaw_deg, double pitch_deg, double roll_deg, double distance,
                          double height) {
    const double d2r = M_PI / 180.0;
    // Center the cylinder on the optical axis at the given distance.
    RigidTransform T;
    Mat3 R = (Eigen::AngleAxisd(roll_deg * d2r, Vec3::UnitZ()) *
              Eigen::AngleAxisd(pitch_deg * d2r, Vec3::UnitX()) *
              Eigen::AngleAxisd(yaw_deg * d2r, Vec3::UnitY()))
                 .toRotationMatrix();
    T.rotation = R;
    T.translation = Vec3(0, 0, distance) - R * Vec3(0, height / 2, 0);
    return T;
}

int run(int argc, char** argv) {
    CLI::App app{"CylinderTag toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file");

    // generate
    auto* gen = app.add_subcommand("generate", "generate a marker dictionary");
    GenConfig gc;
    std::string gen_out = "dict.txt";
    gen->add_option("--markers", gc.target_markers, "target marker count");
    gen->add_option("--columns", gc.marker_length, "columns per marker");
    gen->add_option("--field", gc.field_length, "feature field length f");
    gen->add_option("--seed", gc.seed, "random seed");
    gen->add_option("-o,--output", gen_out, "dictionary file");

    // render
    auto* ren = app.add_subcommand("render", "render a printable pattern + corner model");
    std::string ren_dict, ren_out = "pattern.pgm", ren_model;
    int ren_id = 0;
    double ren_h = 60.0, ren_r = 25.0, ren_dpi = 300.0;
    ren->add_option("--dict", ren_dict, "dictionary file")->required();
    ren->add_option("--id", ren_id, "marker id")->required();
    ren->add_option("--height", ren_h, "marker height (mm)");
    ren->add_option("--radius", ren_r, "cylinder radius (mm)");
    ren->add_option("--dpi", ren_dpi, "pattern resolution");
    ren->add_option("-o,--output", ren_out, "pattern PGM");
    ren->add_option("--model", ren_model, "corner model output file");

    // synth
    auto* syn = app.add_subcommand("synth", "render a synthetic camera scene");
    std::string syn_dict, syn_intr, syn_out = "scene.pgm", syn_gt;
    int syn_id = 0, syn_w = 1920, syn_hpx = 1200, syn_ss = 4;
    double syn_h = 200.0, syn_r = 25.0;
    double syn_yaw = 0, syn_pitch = 0, syn_roll = 0, syn_dist = 500;
    double syn_noise = 0, syn_blur = 0;
    uint64_t syn_seed = 1;
    syn->add_option("--dict", syn_dict, "dictionary file")->required();
    syn->add_option("--id", syn_id, "marker id")->required();
    syn->add_option("--intrinsics", syn_intr, "intrinsics file")->required();
    syn->add_option("--height", syn_h, "marker height (mm)");
    syn->add_option("--radius", syn_r, "cylinder radius (mm)");
    syn->add_option("--width", syn_w, "image width (px)");
    syn->add_option("--rows", syn_hpx, "image height (px)");
    syn->add_option("--yaw", syn_yaw, "yaw (deg)");
    syn->add_option("--pitch", syn_pitch, "pitch (deg)");
    syn->add_option("--roll", syn_roll, "roll (deg)");
    syn->add_option("--distance", syn_dist, "distance (mm)");
    syn->add_option("--noise", syn_noise, "Gaussian noise sigma (gray)");
    syn->add_option("--blur", syn_blur, "Gaussian blur sigma (px)");
    syn->add_option("--supersample", syn_ss, "supersampling factor");
    syn->add_option("--seed", syn_seed, "random seed");
    syn->add_option("-o,--output", syn_out, "image PGM");
    syn->add_option("--gt", syn_gt, "ground-truth output file");

    // detect
    auto* det = app.add_subcommand("detect", "detect markers in images");
    std::vector<std::string> det_images;
    std::string det_dict, det_intr, det_out = "detections.txt";
    det->add_option("images", det_images, "input PGM images")->required();
    det->add_option("--dict", det_dict, "dictionary file")->required();
    det->add_option("--intrinsics", det_intr, "intrinsics file (for undistortion)");
    det->add_option("-o,--output", det_out, "detections file");

    // pose
    auto* pos = app.add_subcommand("pose", "estimate poses from detections");
    std::string pos_det, pos_model, pos_intr, pos_out;
    pos->add_option("--detections", pos_det)->required();
    pos->add_option("--model", pos_model, "object/corner model file")->required();
    pos->add_option("--intrinsics", pos_intr)->required();
    pos->add_option("-o,--output", pos_out, "output file (default stdout)");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "reconstruct a model from stereo frames");
    std::string rec_left, rec_right, rec_calib, rec_out = "model.txt";
    rec->add_option("--left", rec_left, "left-camera detections file")->required();
    rec->add_option("--right", rec_right, "right-camera detections file")->required();
    rec->add_option("--calib", rec_calib,
                    "stereo calib: line 1 intrinsics, line 2 left-to-right pose")->required();
    rec->add_option("-o,--output", rec_out, "object model output");

    // eval
    auto* evl = app.add_subcommand("eval", "precision/recall against ground truth");
    std::string evl_det, evl_out;
    std::vector<std::string> evl_gt;
    double evl_gate = 5.0;
    evl->add_option("--detections", evl_det)->required();
    evl->add_option("--gt", evl_gt, "ground-truth files, one per image, in order")->required();
    evl->add_option("--gate", evl_gate, "TP corner-error gate (px)");
    evl->add_option("-o,--output", evl_out, "CSV output (default stdout)");

    // crsim
    auto* crs = app.add_subcommand("crsim", "cross-ratio noise simulation");
    double crs_len = 100.0, crs_bc = 20.0, crs_sigma = 0.5;
    int crs_trials = 10000, crs_positions = 21;
    uint64_t crs_seed = 1;
    std::string crs_out;
    crs->add_option("--length", crs_len, "line length");
    crs->add_option("--bc", crs_bc, "BC width");
    crs->add_option("--sigma", crs_sigma, "noise sigma");
    crs->add_option("--trials", crs_trials);
    crs->add_option("--positions", crs_positions);
    crs->add_option("--seed", crs_seed);
    crs->add_option("-o,--output", crs_out, "CSV output (default stdout)");

    // bench
    auto* ben = app.add_subcommand("bench", "detection timing");
    std::string ben_image, ben_dict;
    int ben_frames = 50;
    ben->add_option("--image", ben_image)->required();
    ben->add_option("--dict", ben_dict)->required();
    ben->add_option("--frames", ben_frames);

    CLI11_PARSE(app, argc, argv);

    Config cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    DetectorParams dp = cfg.detector_params();

    if (*gen) {
        GenResult res = generate(gc);
        res.dictionary.save(gen_out);
        std::cout << "markers " << res.dictionary.markers().size() << " reached_target "
                  << (res.reached_target ? 1 : 0) << "\n";
        return res.reached_target ? 0 : 1;
    }
    if (*ren) {
        Dictionary dict = Dictionary::load(ren_dict);
        MarkerLayout layout = layout_from_dict(dict, ren_id, ren_h, ren_r);
        render_pattern(layout, ren_dpi).save_pgm(ren_out);
        if (!ren_model.empty()) ideal_cylinder_model(layout).save(ren_model);
        return 0;
    }
    if (*syn) {
        Dictionary dict = Dictionary::load(syn_dict);
        MarkerLayout layout = layout_from_dict(dict, syn_id, syn_h, syn_r);
        SceneConfig sc;
        sc.intrinsics = load_intrinsics(syn_intr);
        sc.width = syn_w;
        sc.height = syn_hpx;
        sc.supersampling = syn_ss;
        sc.noise_sigma = syn_noise;
        sc.blur_sigma = syn_blur;
        sc.seed = syn_seed;
        sc.pose = scene_pose(syn_yaw, syn_pitch, syn_roll, syn_dist, syn_h);
        auto [img, gt] = render_scene(layout, sc);
        img.save_pgm(syn_out);
        if (!syn_gt.empty()) gt.save(syn_gt);
        return 0;
    }
    if (*det) {
        Dictionary dict = Dictionary::load(det_dict);
        CameraIntrinsics K;
        bool have_k = !det_intr.empty();
        if (have_k) K = load_intrinsics(det_intr);
        std::vector<ImageDetections> all;
        for (const auto& path : det_images) {
            GrayImage img = GrayImage::load_pgm(path);
            DetectResult r = detect(img, dict, dp, have_k ? &K : nullptr);
            all.push_back({path, r.markers});
        }
        save_detections(all, det_out);
        return 0;
    }
    if (*pos) {
        ObjectModel model = load_any_model(pos_model);
        CameraIntrinsics K = load_intrinsics(pos_intr);
        auto all = load_detections(pos_det);
        std::ostringstream out;
        char buf[256];
        for (const auto& img : all) {
            Correspondences cs;
            for (const auto& m : img.markers)
                for (const auto& col : m.columns)
                    for (int c = 0; c < 8; ++c) {
                        auto it = model.points.find({m.id, col.column, c});
                        if (it == model.points.end()) continue;
                        Vec2 p = col.corners[static_cast<size_t>(c)];
                        if (K.has_distortion()) p = undistort(K, p);
                        cs.push_back({it->second, p});
                    }
            if (cs.size() < 6) {
                out << "none\n";
                continue;
            }
            PoseEstimate pe = solve_pnp(cs, K);
            Eigen::Quaterniond q(pe.pose.rotation);
            std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.6f %.6f %.6f %.6f\n",
                          q.w(), q.x(), q.y(), q.z(), pe.pose.translation.x(),
                          pe.pose.translation.y(), pe.pose.translation.z(), pe.rms_px);
            out << buf;
        }
        if (pos_out.empty()) std::cout << out.str();
        else {
            std::ofstream os(pos_out);
            os << out.str();
            if (!os) throw std::runtime_error("write failed: " + pos_out);
        }
        return 0;
    }
    if (*rec) {
        std::ifstream cal(rec_calib);
        if (!cal) throw std::runtime_error("cannot open " + rec_calib);
        StereoRig rig;
        cal >> rig.intrinsics.fx >> rig.intrinsics.fy >> rig.intrinsics.cx >> rig.intrinsics.cy;
        rig.left_to_right = parse_pose_line(cal);
        auto left = load_detections(rec_left);
        auto right = load_detections(rec_right);
        if (left.size() != right.size())
            throw std::runtime_error("left/right frame counts differ");
        std::vector<StereoFrame> frames(left.size());
        for (size_t i = 0; i < left.size(); ++i) {
            std::map<std::tuple<int, int, int>, StereoObservation> obs;
            for (const auto& m : left[i].markers)
                for (const auto& col : m.columns)
                    for (int c = 0; c < 8; ++c) {
                        auto& o = obs[{m.id, col.column, c}];
                        o.marker = m.id;
                        o.column = col.column;
                        o.corner = c;
                        o.left = col.corners[static_cast<size_t>(c)];
                        o.has_left = true;
                    }
            for (const auto& m : right[i].markers)
                for (const auto& col : m.columns)
                    for (int c = 0; c < 8; ++c) {
                        auto& o = obs[{m.id, col.column, c}];
                        o.marker = m.id;
                        o.column = col.column;
                        o.corner = c;
                        o.right = col.corners[static_cast<size_t>(c)];
                        o.has_right = true;
                    }
            for (auto& [k, o] : obs) frames[i].observations.push_back(o);
        }
        ReconstructionResult res = reconstruct(frames, rig);
        res.model.save(rec_out);
        std::cout << "points " << res.model.points.size() << " rms_px " << res.rms_px
                  << " rounds " << res.rounds << "\n";
        return 0;
    }
    if (*evl) {
        auto all = load_detections(evl_det);
        if (all.size() != evl_gt.size())
            throw std::runtime_error("detections/ground-truth counts differ");
        std::vector<std::vector<MarkerDetection>> dets;
        std::vector<GroundTruth> gts;
        for (size_t i = 0; i < all.size(); ++i) {
            dets.push_back(all[i].markers);
            gts.push_back(GroundTruth::load(evl_gt[i]));
        }
        EvalResult r = precision_recall(dets, gts, evl_gate);
        std::ostringstream out;
        out << "precision,recall,tp,fp,fn,precision_defined\n";
        out << r.precision << "," << r.recall << "," << r.counts.tp << "," << r.counts.fp
            << "," << r.counts.fn << "," << (r.precision_undefined ? 0 : 1) << "\n";
        if (evl_out.empty()) std::cout << out.str();
        else {
            std::ofstream os(evl_out);
            os << out.str();
            if (!os) throw std::runtime_error("write failed: " + evl_out);
        }
        return 0;
    }
    if (*crs) {
        auto curve = cr_noise_simulation(crs_len, crs_bc, crs_sigma, crs_trials, crs_positions,
                                         crs_seed);
        std::ostringstream out;
        out << "position,std\n";
        for (const auto& p : curve) out << p.position << "," << p.std_dev << "\n";
        if (crs_out.empty()) std::cout << out.str();
        else {
            std::ofstream os(crs_out);
            os << out.str();
            if (!os) throw std::runtime_error("write failed: " + crs_out);
        }
        return 0;
    }
    if (*ben) {
        Dictionary dict = Dictionary::load(ben_dict);
        GrayImage img = GrayImage::load_pgm(ben_image);
        std::vector<double> ms;
        for (int i = 0; i < ben_frames; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            DetectResult r = detect(img, dict, dp);
            auto t1 = std::chrono::steady_clock::now();
            (void)r;
            ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        std::sort(ms.begin(), ms.end());
        std::cout << "frames " << ben_frames << " median_ms " << ms[ms.size() / 2]
                  << " min_ms " << ms.front() << " max_ms " << ms.back() << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
