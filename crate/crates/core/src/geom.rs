//! Axis-aligned rectangles in either normalized page fractions or pixels.

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Slack used when deciding whether two closed boxes touch.
pub const TOUCH_EPS: f64 = 1e-9;

/// Axis-aligned rectangle: top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

/// Page size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDims {
    pub width_px: u32,
    pub height_px: u32,
}

impl PageDims {
    pub fn new(width_px: u32, height_px: u32) -> Self {
        Self {
            width_px,
            height_px,
        }
    }
}

impl<T: Scalar> Rect<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Self {
        Self { x, y, w, h }
    }

    pub fn from_extents(x0: T, y0: T, x1: T, y1: T) -> Self {
        Self {
            x: x0,
            y: y0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    pub fn right(&self) -> T {
        self.x + self.w
    }

    pub fn bottom(&self) -> T {
        self.y + self.h
    }

    pub fn area(&self) -> T {
        self.w * self.h
    }

    /// Checks the normalized-box invariants: non-negative origin, positive
    /// extent, and far edges within the page up to `tol`.
    pub fn check_normalized(&self, tol: T) -> Result<(), String> {
        let fields = [self.x, self.y, self.w, self.h];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite coordinate in {self:?}"));
        }
        if self.x < T::zero() || self.y < T::zero() {
            return Err(format!("negative origin in {self:?}"));
        }
        if self.w <= T::zero() || self.h <= T::zero() {
            return Err(format!("non-positive extent in {self:?}"));
        }
        if self.right() > T::one() + tol || self.bottom() > T::one() + tol {
            return Err(format!("box extends past the page in {self:?}"));
        }
        Ok(())
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Self) -> Self {
        Self::from_extents(
            self.x.min(other.x),
            self.y.min(other.y),
            self.right().max(other.right()),
            self.bottom().max(other.bottom()),
        )
    }

    pub fn intersection_area(&self, other: &Self) -> T {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= T::zero() || h <= T::zero() {
            T::zero()
        } else {
            w * h
        }
    }

    /// Positive-area intersection. Shared edges do not count.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.intersection_area(other) > T::zero()
    }

    /// Closed-interval intersection on both axes: overlapping, edge-adjacent
    /// and corner-adjacent boxes all touch.
    pub fn touches(&self, other: &Self) -> bool {
        let eps = T::c(TOUCH_EPS);
        self.x <= other.right() + eps
            && other.x <= self.right() + eps
            && self.y <= other.bottom() + eps
            && other.y <= self.bottom() + eps
    }

    /// Whether `inner` lies within `self`, allowing `tol` on every side.
    pub fn contains(&self, inner: &Self, tol: T) -> bool {
        inner.x >= self.x - tol
            && inner.y >= self.y - tol
            && inner.right() <= self.right() + tol
            && inner.bottom() <= self.bottom() + tol
    }

    /// Gap between the vertical extents, zero when they overlap.
    pub fn vertical_gap(&self, other: &Self) -> T {
        let gap = (self.y - other.bottom()).max(other.y - self.bottom());
        gap.max(T::zero())
    }

    pub fn horizontal_gap(&self, other: &Self) -> T {
        let gap = (self.x - other.right()).max(other.x - self.right());
        gap.max(T::zero())
    }

    /// Normalized box to pixel units.
    pub fn to_pixels(&self, page: PageDims) -> Self {
        let pw = T::c(f64::from(page.width_px));
        let ph = T::c(f64::from(page.height_px));
        Self::new(self.x * pw, self.y * ph, self.w * pw, self.h * ph)
    }

    /// Pixel box to normalized page fractions.
    pub fn to_normalized(&self, page: PageDims) -> Self {
        let pw = T::c(f64::from(page.width_px));
        let ph = T::c(f64::from(page.height_px));
        Self::new(self.x / pw, self.y / ph, self.w / pw, self.h / ph)
    }

    pub fn cast<U: Scalar>(&self) -> Rect<U> {
        Rect {
            x: U::c(self.x.to_f64_lossy()),
            y: U::c(self.y.to_f64_lossy()),
            w: U::c(self.w.to_f64_lossy()),
            h: U::c(self.h.to_f64_lossy()),
        }
    }
}

/// Grows a normalized box by `kernel_w` pixels on the left and right and
/// `kernel_h` pixels on the top and bottom, clamped to the page.
pub fn dilate<T: Scalar>(bbox: &Rect<T>, kernel_w: u32, kernel_h: u32, page: PageDims) -> Rect<T> {
    let dx = T::c(f64::from(kernel_w)) / T::c(f64::from(page.width_px));
    let dy = T::c(f64::from(kernel_h)) / T::c(f64::from(page.height_px));
    let x0 = (bbox.x - dx).max(T::zero());
    let y0 = (bbox.y - dy).max(T::zero());
    let x1 = (bbox.right() + dx).min(T::one());
    let y1 = (bbox.bottom() + dy).min(T::one());
    Rect::from_extents(x0, y0, x1, y1)
}
