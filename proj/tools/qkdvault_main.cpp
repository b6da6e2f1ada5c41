#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "qkdvault/bb84.hpp"
#include "qkdvault/errors.hpp"
#include "qkdvault/experiments.hpp"
#include "qkdvault/http_server.hpp"
#include "qkdvault/keystore.hpp"
#include "qkdvault/qotp.hpp"
#include "qkdvault/vault_service.hpp"

namespace {

using namespace qkdvault;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitKeyExhausted = 3;
constexpr int kExitSessionAbort = 4;
constexpr int kExitIo = 5;

struct SimulateOptions {
    size_t n = 10000;
    uint64_t seed = 1;
    double flip = 0.0;
    double loss = 0.0;
    std::string adversary = "none";
    double fraction = 0.0;
    size_t sample = 19;
    double threshold = 0.11;
    size_t margin = 30;
    size_t trials = 1;
    bool script_table2 = false;
    bool with_auth = false;
    std::string transcript_path;
    std::string summary_csv;
    std::string pool_path;
};

AdversaryStrategy make_adversary(const std::string& name, double fraction) {
    if (name == "none") return AdversaryStrategy::none();
    if (name == "intercept") return AdversaryStrategy::intercept_resend(fraction);
    if (name == "mitm") return AdversaryStrategy::mitm(true);
    raise(Errc::InvalidArgument, "unknown adversary: " + name);
}

void append_summary(const std::string& path, const SessionParams& params,
                    const ChannelConfig& channel, const AdversaryStrategy& adversary,
                    const QkdSessionResult& result) {
    bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) raise(Errc::Io, "cannot open summary CSV");
    if (fresh) out << session_summary_csv_header() << '\n';
    out << session_summary_csv_row(params, channel, adversary, result) << '\n';
}

int cmd_simulate(const SimulateOptions& opt) {
    if (opt.script_table2) {
        auto raw = generate_raw_scripted(table2_script(), ChannelConfig(0.0, 0.0, opt.seed),
                                         AdversaryStrategy::none(), opt.seed);
        auto sifted = sift(raw.alice, raw.bob, raw.record);
        std::cout << "kept indices: {";
        for (size_t k = 0; k < sifted.kept_indices.size(); ++k) {
            if (k) std::cout << ',';
            std::cout << sifted.kept_indices[k] + 1; // photon numbers are 1-based
        }
        std::cout << "}\n";
        std::cout << "sifted key: " << sifted.bob_sifted.to_string() << "\n";
        return kExitOk;
    }

    AdversaryStrategy adversary = make_adversary(opt.adversary, opt.fraction);

    if (opt.trials > 1) {
        size_t established = 0;
        for (size_t t = 0; t < opt.trials; ++t) {
            SessionParams params;
            params.photon_count = opt.n;
            params.sample_size = opt.sample;
            params.qber_threshold = opt.threshold;
            params.security_margin = opt.margin;
            params.seed = Rng::derive(opt.seed, t + 1);
            ChannelConfig channel(opt.flip, opt.loss, Rng::derive(params.seed, 99));
            Rng secret_rng(Rng::derive(params.seed, 7));
            AuthSecret secret = AuthSecret::random(secret_rng);
            QkdSessionResult result =
                run_session(params, channel, adversary, opt.with_auth ? &secret : nullptr);
            if (result.status == SessionStatus::Established) ++established;
        }
        double abort_rate =
            1.0 - static_cast<double>(established) / static_cast<double>(opt.trials);
        std::printf("trials=%zu established=%zu abort_rate=%.4f\n", opt.trials, established,
                    abort_rate);
        return kExitOk;
    }

    SessionParams params;
    params.photon_count = opt.n;
    params.sample_size = opt.sample;
    params.qber_threshold = opt.threshold;
    params.security_margin = opt.margin;
    params.seed = opt.seed;
    ChannelConfig channel(opt.flip, opt.loss, Rng::derive(opt.seed, 99));

    Rng secret_rng(Rng::derive(opt.seed, 7));
    AuthSecret secret = AuthSecret::random(secret_rng);
    QkdSessionResult result =
        run_session(params, channel, adversary, opt.with_auth ? &secret : nullptr);

    std::printf("status=%s sifted=%zu qber=%.4f disclosed=%zu final=%zu\n",
                status_name(result.status), result.sifted_length, result.estimated_qber,
                result.disclosed_bits, result.final_key ? result.final_key->size() : size_t{0});

    if (!opt.transcript_path.empty()) {
        std::ofstream out(opt.transcript_path, std::ios::trunc);
        if (!out) raise(Errc::Io, "cannot open transcript path");
        out << result.transcript.to_ndjson();
    }
    if (!opt.summary_csv.empty()) {
        append_summary(opt.summary_csv, params, channel, adversary, result);
    }
    if (!opt.pool_path.empty() && result.status == SessionStatus::Established) {
        KeyPool pool = KeyPool::open(opt.pool_path, opt.pool_path + ".audit");
        pool.deposit(result);
        std::printf("deposited %zu bits into %s\n", result.final_key->size(),
                    opt.pool_path.c_str());
    }
    return result.status == SessionStatus::Established ? kExitOk : kExitSessionAbort;
}

struct SweepOptions {
    std::string kind = "detection";
    std::string out_path;
    size_t trials = 100;
    uint64_t seed = 1;
    size_t n = 2048;
    std::vector<size_t> samples;
    std::vector<double> fractions;
    std::vector<double> flips;
    std::vector<size_t> n_values;
    std::vector<size_t> users;
    bool serial = false;
};

int cmd_sweep(const SweepOptions& opt) {
    ExperimentSpec spec;
    spec.kind = kind_from_name(opt.kind);
    spec.trials = opt.trials;
    spec.seed = opt.seed;
    spec.photon_count = opt.n;
    spec.sample_sizes = opt.samples.empty() ? std::vector<size_t>{19} : opt.samples;
    spec.fractions = opt.fractions.empty() ? std::vector<double>{0.25, 0.5, 1.0} : opt.fractions;
    spec.flips = opt.flips.empty() ? std::vector<double>{0.0} : opt.flips;
    spec.photon_counts = opt.n_values.empty() ? std::vector<size_t>{10000} : opt.n_values;
    spec.user_counts = opt.users.empty() ? std::vector<size_t>{10, 100, 1000} : opt.users;

    SweepTable table = run_experiment(spec, !opt.serial);
    write_csv_file(opt.out_path, table);
    std::printf("wrote %zu rows to %s\n", table.rows.size(), opt.out_path.c_str());
    return kExitOk;
}

HttpVaultServer* g_server = nullptr;
void handle_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

int cmd_serve(const std::string& host, int port, uint64_t seed) {
    VaultConfig config;
    config.seed = seed;
    VaultService service(config);
    HttpVaultServer server(service);
    server.start(host, port);
    std::printf("serving on %s:%d\n", host.c_str(), server.port());
    std::fflush(stdout);

    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    server.wait(); // returns once a signal stops the listener
    g_server = nullptr;
    return kExitOk;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open input file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::Io, "cannot open output file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(Errc::Io, "short write: " + path);
}

int cmd_keytool_encrypt(const std::string& pool_path, const std::string& in_path,
                        const std::string& out_path) {
    auto payload = read_file_bytes(in_path);
    KeyPool pool = KeyPool::open(pool_path, pool_path + ".audit");
    PlainText plain = PlainText::from_bytes(payload);
    OtpKey key = pool.consume(plain.bits.size());
    CipherText cipher = encrypt(plain, key);
    write_cipher_file(out_path, cipher);
    std::printf("key_id=%s bits=%zu\n", key_id_hex(cipher.key_id).c_str(), cipher.bits.size());
    return kExitOk;
}

int cmd_keytool_decrypt(const std::string& pool_path, const std::string& in_path,
                        const std::string& out_path) {
    CipherText cipher = read_cipher_file(in_path);
    KeyPool pool = KeyPool::open(pool_path, pool_path + ".audit");
    auto bits = pool.lookup_consumed(cipher.key_id);
    if (!bits.has_value()) {
        raise(Errc::WrongKey, "pool's decrypt ledger has no entry for this key id");
    }
    auto plain = decrypt_with_bits(cipher, *bits);
    write_file_bytes(out_path, plain.to_bytes());
    return kExitOk;
}

int cmd_keytool_status(const std::string& pool_path) {
    KeyPool pool = KeyPool::open(pool_path, pool_path + ".audit");
    std::printf("available: %llu\n", static_cast<unsigned long long>(pool.total_available()));
    std::printf("deposited: %llu\n", static_cast<unsigned long long>(pool.total_deposited()));
    std::printf("consumed: %llu\n", static_cast<unsigned long long>(pool.total_consumed()));
    std::printf("segments: %zu\n", pool.segment_count());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"BB84 key distribution, one-time-pad vault and experiment bench"};
    app.require_subcommand(1);
    app.set_config("--config");

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "run one QKD session (or a trial batch)");
    simulate->add_option("--n", sim.n, "photon count");
    simulate->add_option("--seed", sim.seed, "deterministic seed")->envname("QKDVAULT_SEED");
    simulate->add_option("--flip", sim.flip, "channel flip probability");
    simulate->add_option("--loss", sim.loss, "channel loss probability");
    simulate->add_option("--adversary", sim.adversary, "none|intercept|mitm");
    simulate->add_option("--fraction", sim.fraction, "intercept-resend tap fraction");
    simulate->add_option("--sample", sim.sample, "QBER sample size");
    simulate->add_option("--threshold", sim.threshold, "QBER abort threshold");
    simulate->add_option("--margin", sim.margin, "privacy amplification margin");
    simulate->add_option("--trials", sim.trials, "run this many sessions, report abort rate");
    simulate->add_flag("--script-table2", sim.script_table2,
                       "replay the fixed 8-photon exchange and print the sifted key");
    simulate->add_flag("--auth", sim.with_auth, "authenticate the classical channel");
    simulate->add_option("--transcript", sim.transcript_path, "write NDJSON transcript here");
    simulate->add_option("--summary-csv", sim.summary_csv, "append a session summary row");
    simulate->add_option("--pool", sim.pool_path, "deposit the final key into this pool file");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment grid, write a CSV");
    sweep_cmd->add_option("--kind", sweep.kind,
                          "detection|qber|sifting|scalability|session-demo");
    sweep_cmd->add_option("--out", sweep.out_path, "CSV output path")->required();
    sweep_cmd->add_option("--trials", sweep.trials, "trials per grid point");
    sweep_cmd->add_option("--seed", sweep.seed, "deterministic seed")->envname("QKDVAULT_SEED");
    sweep_cmd->add_option("--n", sweep.n, "photon count per session");
    sweep_cmd->add_option("--samples", sweep.samples, "sample sizes")->delimiter(',');
    sweep_cmd->add_option("--fractions", sweep.fractions, "tap fractions")->delimiter(',');
    sweep_cmd->add_option("--flips", sweep.flips, "flip probabilities")->delimiter(',');
    sweep_cmd->add_option("--n-values", sweep.n_values, "photon counts for sifting yield")
        ->delimiter(',');
    sweep_cmd->add_option("--users", sweep.users, "concurrent user counts")->delimiter(',');
    sweep_cmd->add_flag("--serial", sweep.serial, "use the serial reference engine");

    std::string host = "127.0.0.1";
    int port = 8787;
    uint64_t serve_seed = 0;
    auto* serve = app.add_subcommand("serve", "run the vault HTTP service");
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "bind port");
    serve->add_option("--seed", serve_seed, "service seed")->envname("QKDVAULT_SEED");

    auto* keytool = app.add_subcommand("keytool", "encrypt/decrypt files against a local pool");
    keytool->require_subcommand(1);
    std::string kt_pool, kt_in, kt_out;
    auto* kt_enc = keytool->add_subcommand("encrypt", "consume key bits and encrypt a file");
    kt_enc->add_option("--pool", kt_pool, "pool file")->required();
    kt_enc->add_option("--in", kt_in, "plaintext input")->required();
    kt_enc->add_option("--out", kt_out, "ciphertext output")->required();
    auto* kt_dec = keytool->add_subcommand("decrypt", "decrypt a cipher file via the pool ledger");
    kt_dec->add_option("--pool", kt_pool, "pool file")->required();
    kt_dec->add_option("--in", kt_in, "ciphertext input")->required();
    kt_dec->add_option("--out", kt_out, "plaintext output")->required();
    auto* kt_status = keytool->add_subcommand("pool-status", "print pool accounting");
    kt_status->add_option("--pool", kt_pool, "pool file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
        if (serve->parsed()) return cmd_serve(host, port, serve_seed);
        if (keytool->parsed()) {
            if (kt_enc->parsed()) return cmd_keytool_encrypt(kt_pool, kt_in, kt_out);
            if (kt_dec->parsed()) return cmd_keytool_decrypt(kt_pool, kt_in, kt_out);
            if (kt_status->parsed()) return cmd_keytool_status(kt_pool);
        }
    } catch (const qkdvault::Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", errc_name(e.code()), e.what());
        switch (e.code()) {
            case Errc::KeyExhausted: return kExitKeyExhausted;
            case Errc::Io: return kExitIo;
            case Errc::InvalidArgument:
            case Errc::ValidationFailed: return kExitUsage;
            default: return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
