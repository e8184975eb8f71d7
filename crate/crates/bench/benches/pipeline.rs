use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ftplace::estimate::ContactEstimator;
use ftplace::policy::{self, PolicyConfig};
use ftplace::sensor::{ForceTorqueSensor, SensorConfig};
use ftplace::sim::{GripGeometry, HeldObject, SurfaceModel, Vec2, WorldConfig, WorldState};
use ftplace::spatial::{transform_wrench, RigidTransform, Vec3, Wrench};

fn tower() -> SurfaceModel {
    SurfaceModel::Puck {
        center: Vec2::zeros(),
        radius: 0.045,
        height: 0.02,
        crown: 0.001,
        ripple_amplitude: 0.0,
        ripple_wavelength: 0.02,
        base_height: Some(0.0),
    }
}

fn world() -> WorldState {
    WorldState::new(WorldConfig::default(), tower(), HeldObject::puck(0.045), GripGeometry::default()).unwrap()
}

fn algebra(c: &mut Criterion) {
    let g = RigidTransform::from_axis_angle(Vec3::new(1.0, 2.0, 3.0).normalize(), 0.7, Vec3::new(0.1, -0.2, 0.3)).unwrap();
    let w = Wrench::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, -2.0, 30.0));
    c.bench_function("transform_wrench", |b| b.iter(|| transform_wrench(black_box(&g), black_box(&w))));

    let est = ContactEstimator::default();
    let gravity = Vec3::new(0.0, 0.0, -11.8);
    c.bench_function("estimate_contact", |b| {
        b.iter(|| est.estimate_contact(black_box(&w), black_box(&gravity)))
    });
}

fn simulation(c: &mut Criterion) {
    let world = world();
    c.bench_function("descend_until_contact", |b| {
        b.iter(|| world.descend_until_contact(black_box(Vec2::new(0.02, -0.01)), 10.0, 0.3).unwrap())
    });

    let cfg = PolicyConfig::default();
    c.bench_function("run_placement", |b| {
        b.iter(|| {
            let mut world = world.clone();
            let mut sensor = ForceTorqueSensor::new(SensorConfig::default(), 0).unwrap();
            let calib = policy::calibrate(&world, &mut sensor, &cfg).unwrap();
            policy::run_placement(&mut world, Vec2::new(0.03, 0.0), &cfg, &mut sensor, &calib).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = algebra, simulation
}
criterion_main!(benches);
