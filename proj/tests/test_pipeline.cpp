#include <doctest.h>

#include "pacodi/metrics.hpp"
#include "pacodi/spectral_transform.hpp"
#include "pacodi/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace pacodi;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/pacodi_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_CASE("gen_sines: shape, range, determinism") {
    Rng a(601), b(601);
    const Dataset d1 = gen_sines(50, 24, 5, a);
    const Dataset d2 = gen_sines(50, 24, 5, b);
    CHECK(d1.samples.size() == 50);
    CHECK(d1.length() == 24);
    CHECK(d1.channels() == 5);
    for (const auto& s : d1.samples)
        for (double v : s.values.a) {
            CHECK(v <= 1.0);
            CHECK(v >= -1.0);
        }
    for (size_t i = 0; i < d1.samples.size(); ++i)
        for (size_t j = 0; j < d1.samples[i].values.a.size(); ++j)
            CHECK(d1.samples[i].values.a[j] == d2.samples[i].values.a[j]);
}

TEST_CASE("gen_single_tone concentrates power at the requested bin") {
    Rng rng(602);
    const Dataset d = gen_single_tone(20, 24, 3, 4, rng);
    for (const auto& s : d.samples) CHECK(dominant_bin(s) == 4);
    CHECK_THROWS_AS(gen_single_tone(5, 24, 1, 13, rng), InvalidInputError);
}

TEST_CASE("csv ingestion windows and errors") {
    TempFile f("ingest.csv");
    {
        std::ostringstream oss;
        for (int r = 0; r < 100; ++r) {
            for (int c = 0; c < 7; ++c) oss << (c ? "," : "") << r * 7 + c;
            oss << "\n";
        }
        write_file(f.path, oss.str());
    }
    SUBCASE("stride 24 gives 4 windows") {
        const Dataset d = ingest_csv(f.path, 24, 24, false);
        CHECK(d.samples.size() == 4);
        CHECK(d.length() == 24);
        CHECK(d.channels() == 7);
        CHECK(d.samples[1].values(0, 0) == doctest::Approx(24 * 7));
    }
    SUBCASE("stride 1 gives 77 windows") {
        const Dataset d = ingest_csv(f.path, 24, 1, false);
        CHECK(d.samples.size() == 77);
    }
    SUBCASE("header row is skipped when flagged") {
        TempFile g("ingest_header.csv");
        write_file(g.path, "a,b\n1,2\n3,4\n5,6\n");
        const Dataset d = ingest_csv(g.path, 2, 1, true);
        CHECK(d.samples.size() == 2);
    }
    SUBCASE("malformed rows name the line") {
        TempFile g("ingest_bad.csv");
        write_file(g.path, "1,2\n3,oops\n5,6\n");
        try {
            ingest_csv(g.path, 2, 1, false);
            FAIL("expected a parse error");
        } catch (const InvalidInputError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("ragged rows name the line") {
        TempFile g("ingest_ragged.csv");
        write_file(g.path, "1,2\n3\n");
        try {
            ingest_csv(g.path, 2, 1, false);
            FAIL("expected a parse error");
        } catch (const InvalidInputError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("too few rows") {
        TempFile g("ingest_short.csv");
        write_file(g.path, "1,2\n3,4\n");
        CHECK_THROWS_AS(ingest_csv(g.path, 24, 1, false), InvalidInputError);
    }
}

TEST_CASE("normalization centers every sample exactly") {
    Rng rng(603);
    Dataset d = gen_sines(30, 24, 3, rng);
    // Shift one channel so the z-score has work to do.
    for (auto& s : d.samples)
        for (int t = 0; t < s.length(); ++t) s.values(t, 1) += 5.0;
    const Dataset original = d;
    normalize(d);
    CHECK(d.normalized);
    for (const auto& s : d.samples)
        for (int c = 0; c < s.channels(); ++c) {
            double mean = 0.0;
            for (int t = 0; t < s.length(); ++t) mean += s.values(t, c);
            CHECK(std::abs(mean / s.length()) < 1e-12);
        }

    SUBCASE("DC bin of the spectrum is zero, so compression succeeds") {
        for (int i = 0; i < 3; ++i) CHECK_NOTHROW(compress(dft(d.samples[i])));
    }

    SUBCASE("stored-mean denormalization round-trips within 1e-9") {
        const Dataset back = denormalize_stored(d);
        for (size_t i = 0; i < back.samples.size(); ++i)
            for (size_t j = 0; j < back.samples[i].values.a.size(); ++j)
                CHECK(std::abs(back.samples[i].values.a[j] -
                               original.samples[i].values.a[j]) < 1e-9);
    }

    SUBCASE("constant channels hit the std floor and are flagged") {
        Dataset flat;
        flat.samples.assign(4, TemporalSeries(8, 2));
        for (auto& s : flat.samples)
            for (int t = 0; t < 8; ++t) {
                s.values(t, 0) = 3.0; // channel 0 constant
                s.values(t, 1) = std::sin(0.5 * t);
            }
        normalize(flat);
        CHECK(flat.norm.std_floored[0]);
        CHECK_FALSE(flat.norm.std_floored[1]);
    }
}

TEST_CASE("samples csv round-trips and carries the header") {
    Rng rng(604);
    const Dataset d = gen_sines(3, 8, 2, rng);
    TempFile f("samples.csv");
    write_samples_csv(f.path, d.samples, "unit-test invocation");
    {
        std::ifstream in(f.path);
        std::string first;
        std::getline(in, first);
        CHECK(first == "# pacodi-samples v1");
        std::string second;
        std::getline(in, second);
        CHECK(second.find("unit-test invocation") != std::string::npos);
    }
    const auto back = read_samples_csv(f.path);
    REQUIRE(back.size() == d.samples.size());
    for (size_t i = 0; i < back.size(); ++i)
        for (size_t j = 0; j < back[i].values.a.size(); ++j)
            CHECK(back[i].values.a[j] == d.samples[i].values.a[j]);
}

TEST_CASE("correlational score") {
    Rng rng(605);
    // Two strongly correlated channels.
    auto make_correlated = [&](int n, bool flip) {
        std::vector<TemporalSeries> out;
        for (int i = 0; i < n; ++i) {
            TemporalSeries s(16, 2);
            for (int t = 0; t < 16; ++t) {
                const double base = rng.normal();
                s.values(t, 0) = base + 0.1 * rng.normal();
                s.values(t, 1) = (flip ? -1.0 : 1.0) * base + 0.1 * rng.normal();
            }
            out.push_back(std::move(s));
        }
        return out;
    };
    const auto real = make_correlated(100, false);

    SUBCASE("identical sets score zero") {
        CHECK(correlational_score(real, real) == 0.0);
    }
    SUBCASE("sign-flipped correlation scores strictly positive") {
        const auto flipped = make_correlated(100, true);
        // Oracle: corr matrices are approx [[1, .99], [.99, 1]] and
        // [[1, -.99], [-.99, 1]], so the Frobenius gap is ~2*.99*sqrt(2)/2.
        const double score = correlational_score(real, flipped);
        CHECK(score > 1.0);
        CHECK(score < 1.6);
    }
    SUBCASE("score shrinks with sample count for same-law sets") {
        const auto a1 = make_correlated(30, false);
        const auto b1 = make_correlated(30, false);
        const auto a2 = make_correlated(600, false);
        const auto b2 = make_correlated(600, false);
        CHECK(correlational_score(a2, b2) < correlational_score(a1, b1));
    }
    SUBCASE("constant channel sets the warning flag") {
        auto flat = real;
        for (auto& s : flat)
            for (int t = 0; t < s.length(); ++t) s.values(t, 1) = 2.0;
        bool warned = false;
        (void)correlational_score(real, flat, &warned);
        CHECK(warned);
    }
}

TEST_CASE("spectral density distance") {
    Rng rng(606);
    const Dataset tone = gen_single_tone(40, 16, 1, 3, rng);
    SUBCASE("identical sets give zero") {
        CHECK(spectral_density_distance(tone.samples, tone.samples) == 0.0);
    }
    SUBCASE("single tone vs white noise exceeds the dominant-bin power") {
        std::vector<TemporalSeries> noise;
        for (int i = 0; i < 40; ++i) {
            TemporalSeries s(16, 1);
            for (double& v : s.values.a) v = rng.normal();
            noise.push_back(std::move(s));
        }
        // The tone's power sits in bins {3, 13}; white noise spreads sigma^2
        // over all bins. Lower bound: the tone's dominant-bin power minus the
        // noise share there.
        const SpectralState spec = dft(tone.samples[0]);
        double tone_power = 0.0;
        for (int k : {3, 13})
            tone_power += spec.real_part(k, 0) * spec.real_part(k, 0) +
                          spec.imag_part(k, 0) * spec.imag_part(k, 0);
        CHECK(spectral_density_distance(tone.samples, noise) > tone_power - 2.5);
    }
    SUBCASE("invariant to sample order") {
        auto shuffled = tone.samples;
        std::swap(shuffled.front(), shuffled.back());
        // Mean-based statistic: order changes nothing beyond reassociation.
        CHECK(spectral_density_distance(tone.samples, shuffled) < 1e-12);
    }
}

TEST_CASE("marginal wasserstein is zero on identical sets and positive on shifted ones") {
    Rng rng(607);
    const Dataset d = gen_sines(20, 16, 2, rng);
    const auto zero = marginal_wasserstein1(d.samples, d.samples);
    for (double v : zero) CHECK(v == 0.0);
    auto shifted = d.samples;
    for (auto& s : shifted)
        for (double& v : s.values.a) v += 1.0;
    const auto w = marginal_wasserstein1(d.samples, shifted);
    for (double v : w) CHECK(v == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("config parsing") {
    SUBCASE("defaults materialize") {
        const PipelineConfig c = PipelineConfig::from_text("");
        CHECK(c.schedule_steps == 1000);
        CHECK(c.weighting == WeightingMode::Simple);
        CHECK(c.sde_score_factor == SdeScoreFactor::One);
    }
    SUBCASE("values parse and validate") {
        const PipelineConfig c = PipelineConfig::from_text(
            "data.kind=single-tone\ndata.length=24\nmodel.width=16\nschedule.T=100\n"
            "train.steps=5\nsampler.kind=sde\n");
        CHECK(c.data_kind == "single-tone");
        CHECK(c.width == 16);
        CHECK(c.sampler_kind == SamplerKind::Sde);
    }
    SUBCASE("rejections name the key") {
        CHECK_THROWS_WITH_AS(PipelineConfig::from_text("schedule.T=0\n"),
                             "config: schedule.T must be >= 1", InvalidInputError);
        CHECK_THROWS_WITH_AS(PipelineConfig::from_text("train.batch=nope\n"),
                             "config: key 'train.batch' expects an integer, got 'nope'",
                             InvalidInputError);
        CHECK_THROWS_WITH_AS(PipelineConfig::from_text("model.widht=8\n"),
                             "config: unknown key 'model.widht'", InvalidInputError);
    }
    SUBCASE("manifest text round-trips") {
        PipelineConfig c;
        c.length = 48;
        c.coupling = BranchCoupling::Decoupled;
        c.beta_max = 0.123;
        const PipelineConfig back = PipelineConfig::from_text(c.to_text());
        CHECK(back.length == 48);
        CHECK(back.coupling == BranchCoupling::Decoupled);
        CHECK(back.beta_max == 0.123);
    }
}

TEST_CASE("checkpoint round-trips bitwise") {
    PipelineConfig cfg = PipelineConfig::from_text(
        "data.kind=sines\ndata.n=16\ndata.length=8\ndata.channels=2\nmodel.width=8\n"
        "model.heads=2\nmodel.blocks=1\nmodel.time_embed_dim=8\nschedule.T=10\n"
        "train.steps=2\ntrain.batch=4\n");
    TempFile f("roundtrip.ckpt");
    cfg.out_path = f.path;
    TrainResult run = train_pipeline(cfg, nullptr);
    save_checkpoint(f.path, run.checkpoint);
    const Checkpoint back = load_checkpoint(f.path);

    CHECK(back.train_step == run.checkpoint.train_step);
    CHECK(back.adam.step == run.checkpoint.adam.step);
    CHECK(back.rng_state.base_seed == run.checkpoint.rng_state.base_seed);
    CHECK(back.rng_state.s == run.checkpoint.rng_state.s);

    std::vector<double> a, b;
    run.checkpoint.params.for_each_tensor(
        [&](const std::string&, const Mat& m) { a.insert(a.end(), m.a.begin(), m.a.end()); });
    back.params.for_each_tensor(
        [&](const std::string&, const Mat& m) { b.insert(b.end(), m.a.begin(), m.a.end()); });
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    REQUIRE(back.norm.sample_means.a.size() == run.checkpoint.norm.sample_means.a.size());
    for (size_t i = 0; i < back.norm.sample_means.a.size(); ++i)
        CHECK(back.norm.sample_means.a[i] == run.checkpoint.norm.sample_means.a[i]);
}

TEST_CASE("resume equals an uninterrupted run bitwise") {
    PipelineConfig cfg = PipelineConfig::from_text(
        "data.kind=sines\ndata.n=12\ndata.length=8\ndata.channels=2\nmodel.width=8\n"
        "model.heads=2\nmodel.blocks=1\nmodel.time_embed_dim=8\nschedule.T=10\n"
        "train.batch=4\n");
    TempFile f("resume.ckpt");
    cfg.out_path = f.path;

    cfg.train_steps = 6;
    const TrainResult whole = train_pipeline(cfg, nullptr);

    cfg.train_steps = 3;
    TrainResult part = train_pipeline(cfg, nullptr);
    save_checkpoint(f.path, part.checkpoint);
    const TrainResult resumed = resume_training(load_checkpoint(f.path), 3, nullptr);

    std::vector<double> a, b;
    whole.checkpoint.params.for_each_tensor(
        [&](const std::string&, const Mat& m) { a.insert(a.end(), m.a.begin(), m.a.end()); });
    resumed.checkpoint.params.for_each_tensor(
        [&](const std::string&, const Mat& m) { b.insert(b.end(), m.a.begin(), m.a.end()); });
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(whole.checkpoint.train_step == resumed.checkpoint.train_step);
}

TEST_CASE("generation produces finite de-normalized series deterministically") {
    PipelineConfig cfg = PipelineConfig::from_text(
        "data.kind=sines\ndata.n=32\ndata.length=8\ndata.channels=2\nmodel.width=8\n"
        "model.heads=2\nmodel.blocks=1\nmodel.time_embed_dim=8\nschedule.T=20\n"
        "train.steps=3\ntrain.batch=4\n");
    const TrainResult run = train_pipeline(cfg, nullptr);

    SamplerConfig sc = cfg.sampler_config();
    Rng a(99), b(99);
    const auto s1 = generate_samples(run.checkpoint, 4, sc, a);
    const auto s2 = generate_samples(run.checkpoint, 4, sc, b);
    REQUIRE(s1.size() == 4);
    for (size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].length() == 8);
        for (size_t j = 0; j < s1[i].values.a.size(); ++j) {
            CHECK(std::isfinite(s1[i].values.a[j]));
            CHECK(s1[i].values.a[j] == s2[i].values.a[j]);
        }
    }

    SUBCASE("degenerate-but-legal sde settings run") {
        SamplerConfig tiny = sc;
        tiny.kind = SamplerKind::Sde;
        tiny.sde_steps = 2;
        Rng c(100);
        const auto s = generate_samples(run.checkpoint, 2, tiny, c);
        CHECK(s.size() == 2);
        for (const auto& series : s)
            for (double v : series.values.a) CHECK(std::isfinite(v));
    }
}

TEST_CASE("generated per-channel spread stays within the sanity envelope") {
    // Property, not a quality claim: after a short training run, generated
    // channel stds sit within [0.3, 3] x the training data's stds.
    PipelineConfig cfg = PipelineConfig::from_text(
        "data.kind=sines\ndata.n=128\ndata.length=8\ndata.channels=2\nmodel.width=16\n"
        "model.heads=4\nmodel.blocks=1\nmodel.time_embed_dim=8\nschedule.T=20\n"
        "schedule.beta_min=1e-3\nschedule.beta_max=1e-1\ntrain.steps=120\ntrain.batch=16\n"
        "train.lr=2e-3\n");
    const TrainResult run = train_pipeline(cfg, nullptr);
    Rng rng(888);
    const auto samples = generate_samples(run.checkpoint, 64, cfg.sampler_config(), rng);

    const Dataset train_data = build_dataset(cfg);
    auto channel_std = [](const std::vector<TemporalSeries>& set, int d) {
        double mean = 0.0, sq = 0.0;
        long count = 0;
        for (const auto& s : set)
            for (int t = 0; t < s.length(); ++t) {
                mean += s.values(t, d);
                ++count;
            }
        mean /= count;
        for (const auto& s : set)
            for (int t = 0; t < s.length(); ++t) sq += std::pow(s.values(t, d) - mean, 2);
        return std::sqrt(sq / count);
    };
    for (int d = 0; d < 2; ++d) {
        const double real_std = channel_std(train_data.samples, d);
        const double synth_std = channel_std(samples, d);
        CHECK(synth_std > 0.3 * real_std);
        CHECK(synth_std < 3.0 * real_std);
    }
}

TEST_CASE("training log lines are tab-separated machine-parseable rows") {
    PipelineConfig cfg = PipelineConfig::from_text(
        "data.kind=sines\ndata.n=8\ndata.length=8\ndata.channels=1\nmodel.width=8\n"
        "model.heads=2\nmodel.blocks=1\nmodel.time_embed_dim=8\nschedule.T=10\n"
        "train.steps=2\ntrain.batch=2\n");
    std::ostringstream log;
    train_pipeline(cfg, &log);
    std::istringstream in(log.str());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        size_t tabs = 0;
        for (char c : line) tabs += c == '\t';
        CHECK(tabs == 4); // step, loss_real, loss_imag, total, wall
        int step = 0;
        double lr_ = 0, li = 0, tot = 0, wall = 0;
        std::istringstream parse(line);
        parse >> step >> lr_ >> li >> tot >> wall;
        CHECK(parse);
        CHECK(tot == doctest::Approx(lr_ + li));
    }
    CHECK(rows == 2);
}
