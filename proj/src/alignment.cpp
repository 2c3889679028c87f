#include "epsext/alignment.hpp"

#include <cmath>

namespace epsext {

void validate_labelled_pair(const LabelledPair& pair) {
    if (pair.ys.empty() || pair.ys.size() != pair.zs.size()) {
        throw InvalidConfig("labelled pair needs equal nonempty point lists");
    }
    auto check_distinct = [](const std::vector<Vec>& pts, const char* name) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                if ((pts[i] - pts[j]).norm() <= 1e-12) {
                    throw InvalidConfig(std::string(name) +
                                        " points are not pairwise distinct");
                }
            }
        }
    };
    check_distinct(pair.ys, "source");
    check_distinct(pair.zs, "image");
}

ProcrustesResult procrustes_align(const LabelledPair& pair, bool proper) {
    validate_labelled_pair(pair);
    const int n = static_cast<int>(pair.ys[0].size());
    const std::size_t l = pair.ys.size();

    Vec yc = Vec::Zero(n);
    Vec zc = Vec::Zero(n);
    for (std::size_t i = 0; i < l; ++i) {
        yc += pair.ys[i];
        zc += pair.zs[i];
    }
    yc /= static_cast<double>(l);
    zc /= static_cast<double>(l);

    Mat cross = Mat::Zero(n, n);
    for (std::size_t i = 0; i < l; ++i) {
        cross += (pair.zs[i] - zc) * (pair.ys[i] - yc).transpose();
    }

    Mat t;
    if (cross.norm() == 0.0) {
        t = Mat::Identity(n, n);
    } else {
        Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat u = svd.matrixU();
        Mat v = svd.matrixV();
        t = u * v.transpose();
        if (proper && t.determinant() < 0.0) {
            u.col(n - 1) *= -1.0;  // column of the smallest singular value
            t = u * v.transpose();
        }
    }
    // Numerically re-orthonormalize so downstream motion invariants hold.
    t = gram_schmidt(t);

    ProcrustesResult out{EuclideanMotion(t, zc - t * yc), 0.0};
    for (std::size_t i = 0; i < l; ++i) {
        out.max_residual = std::max(
            out.max_residual, (pair.zs[i] - out.motion(pair.ys[i])).norm());
    }
    return out;
}

LabelledPair normalize_pair(const LabelledPair& pair) {
    validate_labelled_pair(pair);
    if (pair.ys.size() < 2) {
        throw InvalidConfig("normalize_pair needs at least two points");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.ys.size(); ++i) {
        for (std::size_t j = 0; j < pair.ys.size(); ++j) {
            if (i == j) continue;
            sum += (pair.ys[i] - pair.ys[j]).squaredNorm();
            sum += (pair.zs[i] - pair.zs[j]).squaredNorm();
        }
    }
    if (sum < 1e-24) throw DegenerateSet("pair collapses under normalization");
    double s = 1.0 / std::sqrt(sum);

    LabelledPair out;
    out.ys.reserve(pair.ys.size());
    out.zs.reserve(pair.zs.size());
    for (std::size_t i = 0; i < pair.ys.size(); ++i) {
        out.ys.push_back(s * (pair.ys[i] - pair.ys[0]));
        out.zs.push_back(s * (pair.zs[i] - pair.zs[0]));
    }
    return out;
}

namespace {

bool next_combination(std::vector<int>& c, int total) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[i] < total - k + i) {
            ++c[i];
            for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

double tuple_diameter(const std::vector<Vec>& pts, const std::vector<int>& idx) {
    double d = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            d = std::max(d, (pts[idx[a]] - pts[idx[b]]).norm());
        }
    }
    return d;
}

double edge_determinant(const std::vector<Vec>& pts, const std::vector<int>& idx) {
    const int n = static_cast<int>(pts[0].size());
    Mat edges(n, n);
    for (int i = 0; i < n; ++i) edges.col(i) = pts[idx[i + 1]] - pts[idx[0]];
    return edges.determinant();
}

}  // namespace

BlockScan eta_block_scan(const LabelledPair& pair, double eta,
                         std::int64_t tuple_cap) {
    validate_labelled_pair(pair);
    const int n = static_cast<int>(pair.ys[0].size());
    const int l = static_cast<int>(pair.ys.size());
    if (l < n + 1) {
        throw InvalidConfig("eta_block_scan needs at least n+1 points");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        throw InvalidConfig("eta_block_scan needs 0 < eta < 1");
    }

    BlockScan out;
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::int64_t visited = 0;
    do {
        if (++visited > tuple_cap) {
            out.truncated = true;
            break;
        }
        std::vector<Vec> src;
        src.reserve(n + 1);
        for (int i : idx) src.push_back(pair.ys[i]);
        double vol = simplex_volume(src);
        double diam = tuple_diameter(pair.ys, idx);
        if (vol < std::pow(eta * diam, n)) continue;

        EtaBlock blk;
        blk.indices = idx;
        blk.volume = vol;
        blk.diam = diam;
        double ds = edge_determinant(pair.ys, idx);
        double di = edge_determinant(pair.zs, idx);
        blk.orientation = (ds * di > 0.0) ? 1 : -1;
        if (blk.orientation > 0) {
            out.positive.push_back(std::move(blk));
        } else {
            out.negative.push_back(std::move(blk));
        }
    } while (next_combination(idx, l));
    return out;
}

MaxSimplexVolume max_simplex_volume(const std::vector<Vec>& points, int l,
                                    std::int64_t tuple_cap) {
    if (points.empty()) throw InvalidConfig("max_simplex_volume needs points");
    const int n = static_cast<int>(points[0].size());
    if (l > n) throw DimensionError("simplex dimension exceeds ambient dimension");
    if (static_cast<int>(points.size()) < l + 1) {
        throw InvalidConfig("not enough points for an l-simplex");
    }

    MaxSimplexVolume out;
    std::vector<int> idx(l + 1);
    for (int i = 0; i <= l; ++i) idx[i] = i;
    std::int64_t visited = 0;
    do {
        if (++visited > tuple_cap) {
            out.truncated = true;
            break;
        }
        std::vector<Vec> pts;
        pts.reserve(l + 1);
        for (int i : idx) pts.push_back(points[i]);
        out.value = std::max(out.value, simplex_volume(pts));
    } while (next_combination(idx, static_cast<int>(points.size())));
    return out;
}

}  // namespace epsext
